#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace robustcalib::cli {

enum ExitCode : int { ok = 0, usage = 1, failure = 2 };

// Flat `key=value` lines; '#' starts a comment. Throws ParseError with the offending line number.
std::vector<std::pair<std::string, std::string>> parse_config(const std::string& text);

// Entry point shared by the executable and the tests. args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace robustcalib::cli
