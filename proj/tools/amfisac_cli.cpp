#include "amfisac/cli.hpp"

int main(int argc, char** argv) { return amfisac::cli_main(argc, argv); }
