#include "uplocal/cli.hpp"

int main(int argc, char** argv) { return uplocal::cli::main(argc, argv); }
