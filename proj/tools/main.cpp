#include "cli.hpp"

int main(int argc, char** argv)
{
    return semret::cli_main(argc, argv);
}
