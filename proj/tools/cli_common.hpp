#pragma once

// Shared plumbing for the command-line tools: stdin/stdout helpers and the
// exit-code convention (0 success, 1 usage/config errors, 2 IO and format
// errors).

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "vot/errors.hpp"

namespace vot::cli {

// Flag parsing with the exit codes normalized: --help and --version still exit
// 0, every usage mistake exits 1. Returns the process exit code when parsing
// ends the run, nullopt when the command should proceed.
inline std::optional<int> parse_or_exit(CLI::App& app, int argc, char** argv) {
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  return std::nullopt;
}

inline int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::IoError:
    case ErrorCode::SchemaError:
    case ErrorCode::ParseFailure:
    case ErrorCode::EmptyInput:
      return 2;
    default:
      return 1;
  }
}

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

// "-" means the standard stream.
inline std::string read_input(const std::string& path) {
  if (path == "-") {
    std::ostringstream buffer;
    buffer << std::cin.rdbuf();
    return buffer.str();
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

inline void write_output(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out << text;
  if (!out.flush()) throw Error(ErrorCode::IoError, "short write to " + path);
}

}  // namespace vot::cli
