#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace aadt::cli {

// Runs one command line (argv[0] is the program name). Returns the process
// exit code: 0 success, 1 usage error, 2 data error, 3 numerical failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::string& path);

}  // namespace aadt::cli
