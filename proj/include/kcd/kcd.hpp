#pragma once

#include "kcd/cost.hpp"
#include "kcd/data.hpp"
#include "kcd/emdriver.hpp"
#include "kcd/error.hpp"
#include "kcd/eval.hpp"
#include "kcd/knowledge.hpp"
#include "kcd/matrix.hpp"
#include "kcd/metrics.hpp"
#include "kcd/nn.hpp"
#include "kcd/ogve.hpp"
#include "kcd/record.hpp"
#include "kcd/teacher.hpp"
#include "kcd/vaks.hpp"
