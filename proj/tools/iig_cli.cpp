#include "iig/cli_io.hpp"

int main(int argc, char** argv) { return iig::cli_main(argc, argv); }
