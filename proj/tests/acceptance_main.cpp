#include <iostream>

#include "qkdsim/acceptance.hpp"

int main() {
  const int failures = qkd::run_acceptance(std::cout);
  return failures == 0 ? 0 : 1;
}
