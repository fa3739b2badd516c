#include "sacc/cli.h"

int main(int argc, char** argv) { return sacc::cli::run(argc, argv); }
