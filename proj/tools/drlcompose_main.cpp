#include "drl/cli_app.hpp"

int main(int argc, char** argv) { return drl::run_cli(argc, argv); }
