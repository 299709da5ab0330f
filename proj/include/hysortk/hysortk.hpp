#pragma once

#include "hysortk/config.hpp"
#include "hysortk/errors.hpp"
#include "hysortk/exchange.hpp"
#include "hysortk/fasta.hpp"
#include "hysortk/minimizer.hpp"
#include "hysortk/pipeline.hpp"
#include "hysortk/seq.hpp"
#include "hysortk/sortcount.hpp"
#include "hysortk/supermer.hpp"
#include "hysortk/task.hpp"
#include "hysortk/wire.hpp"
