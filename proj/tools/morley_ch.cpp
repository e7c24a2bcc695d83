#include "morley/cli.hpp"

int main(int argc, char** argv) {
  return morley::cli_main(argc, argv, std::cout, std::cerr);
}
