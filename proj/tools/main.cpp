#include "sigssar/cli.hpp"

int main(int argc, char** argv) { return sigssar::cli::run(argc, argv); }
