#include "spoofguard/cli.hpp"

int main(int argc, char** argv) { return spoofguard::cli::run(argc, argv); }
