#ifndef METAEMB_METAEMB_HPP
#define METAEMB_METAEMB_HPP

#include "metaemb/angle_analysis.hpp"
#include "metaemb/combiner.hpp"
#include "metaemb/embedding_set.hpp"
#include "metaemb/error.hpp"
#include "metaemb/eval.hpp"
#include "metaemb/io.hpp"
#include "metaemb/random.hpp"
#include "metaemb/vector_ops.hpp"

#endif  // METAEMB_METAEMB_HPP
