#include "chdg/chdg.hpp"
int main() { return 0; }
