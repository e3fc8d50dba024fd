#include "dspend/cli.hpp"

int main(int argc, char** argv) { return dspend::cli::main(argc, argv); }
