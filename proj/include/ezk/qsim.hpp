#pragma once

#include "ezk/qsim/amp.hpp"
#include "ezk/qsim/extract.hpp"
#include "ezk/qsim/gk.hpp"
#include "ezk/qsim/jordan.hpp"
#include "ezk/qsim/linalg.hpp"
#include "ezk/qsim/report.hpp"
#include "ezk/qsim/rewind.hpp"
