#include "stokolmo/cli.hpp"

int main(int argc, char** argv) { return stokolmo::run(argc, argv); }
