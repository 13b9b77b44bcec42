#pragma once

#include "factorml/encode.hpp"
#include "factorml/fermat.hpp"
#include "factorml/neuralnet.hpp"
#include "factorml/numtheory.hpp"
#include "factorml/prng.hpp"
#include "factorml/search.hpp"
#include "factorml/semigen.hpp"
