#pragma once

#include "groupcos/classifier.hpp"
#include "groupcos/corpus.hpp"
#include "groupcos/embeddings.hpp"
#include "groupcos/errors.hpp"
#include "groupcos/groupsim.hpp"
#include "groupcos/linalg.hpp"
#include "groupcos/metrics.hpp"
#include "groupcos/version.hpp"
