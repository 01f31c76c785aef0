#include "fog/cli.hpp"

int main(int argc, char** argv) { return fog::cli::run(argc, argv); }
