#pragma once

#include <cstddef>
#include <functional>
#include <string>

namespace msprp {

// Reads a whole file; throws msprp::Error naming the path on failure.
std::string read_file(const std::string& path);

// Writes to `path.tmp` and renames over `path`.
void write_file_atomic(const std::string& path, const std::string& contents);

// Runs fn(i) for i in [0, n) on up to `jobs` threads. Exceptions from workers
// are rethrown on the calling thread (first one wins).
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

}  // namespace msprp
