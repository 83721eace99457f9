#pragma once

// Built-in charts, structures and example isotopies: the standard models on
// T^2 x S^1, T^4 x S^1, D^2 x S^1 and the Darboux box, plus the worked
// rotation/scaling families used by the reproduction runner.

#include "cosym/structure.hpp"

namespace cosym::catalog {

ManifoldChart t2s1();
ManifoldChart t4s1();
ManifoldChart d2s1();
ManifoldChart darboux_box();  // [-1,1]^3

// standard structures: omega = sum dtheta_i ^ dtheta_{l+i} (resp. r dr^dtheta,
// dx^dy), eta = ds (resp. dz)
CosymplecticStructure standard_t2s1();
CosymplecticStructure standard_t4s1();
CosymplecticStructure standard_d2s1();
CosymplecticStructure standard_darboux();

// twisted R^3 fragment: omega = dx^dy + dx^dz, eta = dz (Reeb = -dy + dz)
CosymplecticStructure twisted_darboux();

CosymplecticStructure by_name(const std::string& name);
std::vector<std::string> structure_names();

}  // namespace cosym::catalog
