#include "arx/app.hpp"

#include <iostream>

int main(int argc, char** argv) {
  return arx::app::run_cli(argc, argv, std::cout, std::cerr);
}
