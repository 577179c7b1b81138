#include "kerrspring/cli.hpp"

int main(int argc, char** argv) { return kerrspring::cli::run(argc, argv); }
