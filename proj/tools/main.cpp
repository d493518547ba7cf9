#include "cli.hpp"

int main(int argc, char** argv) { return cmm::cli::main(argc, argv); }
