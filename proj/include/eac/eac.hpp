#pragma once

// Everything except the CLI.

#include "eac/text.hpp"
#include "eac/enums.hpp"
#include "eac/model.hpp"
#include "eac/status.hpp"
#include "eac/validation.hpp"
#include "eac/appraisal.hpp"
#include "eac/dsl.hpp"
#include "eac/lifecycle.hpp"
#include "eac/interchange.hpp"
#include "eac/patterns.hpp"
#include "eac/render.hpp"
#include "eac/service.hpp"
#include "eac/corpus.hpp"
