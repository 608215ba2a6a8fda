#include <catch2/catch_amalgamated.hpp>
#include "bathykit/bathykit.hpp"
