#include <iostream>

#include "patrol/cli.hpp"

int main(int argc, char** argv) {
  return patrol::cli::dispatch({argv + 1, argv + argc}, std::cout, std::cerr);
}
