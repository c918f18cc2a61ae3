#include <iostream>

#include <psiw/commands.hpp>

int main(int argc, char **argv)
{
    return psiw::run_cli(argc, argv, std::cout, std::cerr);
}
