#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <unistd.h>

#include "commands.hpp"

int main(int argc, char** argv)
{
  std::vector<std::string> args(argv + 1, argv + argc);
  const char* env = std::getenv("BTFLOW_COLOR");
  const bool color = env != nullptr ? std::string(env) != "0" : isatty(STDERR_FILENO) != 0;
  return btflow::cli::run_cli(args, {std::cout, std::cerr, color});
}
