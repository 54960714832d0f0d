#pragma once

// Umbrella header.

#include "avcap/alignment.hpp"
#include "avcap/config.hpp"
#include "avcap/curation.hpp"
#include "avcap/datasets.hpp"
#include "avcap/dialogue.hpp"
#include "avcap/errors.hpp"
#include "avcap/eval.hpp"
#include "avcap/grpo.hpp"
#include "avcap/hash.hpp"
#include "avcap/json_codec.hpp"
#include "avcap/jsonl.hpp"
#include "avcap/judge_cache.hpp"
#include "avcap/judge_client.hpp"
#include "avcap/judge_gateway.hpp"
#include "avcap/judge_http.hpp"
#include "avcap/judge_mock.hpp"
#include "avcap/judge_parsers.hpp"
#include "avcap/judge_types.hpp"
#include "avcap/parallel.hpp"
#include "avcap/prompts.hpp"
#include "avcap/rewards.hpp"
#include "avcap/rng.hpp"
#include "avcap/text_metrics.hpp"
#include "avcap/utf8.hpp"
