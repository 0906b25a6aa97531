#include "mbc/cli.hpp"

int main(int argc, char** argv) { return mbc::cli_main(argc, argv); }
