#include "herit/cli.hpp"

int main(int argc, char** argv) { return herit::cli::dispatch(argc, argv); }
