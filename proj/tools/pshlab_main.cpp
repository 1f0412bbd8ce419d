#include "pshlab/scenarios.hpp"

int main(int argc, char** argv) { return pshlab::cli_main(argc, argv); }
