#include "torchpilot/cli.hpp"

int main(int argc, char** argv)
{
    return torchpilot::cli::main(argc, argv);
}
