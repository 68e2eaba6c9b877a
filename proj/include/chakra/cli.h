#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace chakra {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitInvalid = 2, kExitIo = 3 };

// args excludes the program name. Errors go to `err` as one JSON line
// {"code": ..., "message": ...}.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace chakra
