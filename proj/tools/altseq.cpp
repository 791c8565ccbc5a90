#include "altseq/cli.hpp"

int main(int argc, char** argv) { return altseq::cli::dispatch(argc, argv); }
