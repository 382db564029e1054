#include "zenopm/cli.hpp"

int main(int argc, char** argv) { return zenopm::cli::run(argc, argv); }
