#pragma once

// Everything, for tools and quick experiments. Library users can include the
// module headers directly.

#include "rectune/abtest/experiment.hpp"
#include "rectune/abtest/platform.hpp"
#include "rectune/abtest/stats.hpp"
#include "rectune/agents/actor.hpp"
#include "rectune/agents/critic.hpp"
#include "rectune/agents/insight.hpp"
#include "rectune/agents/online.hpp"
#include "rectune/agents/skill_agent.hpp"
#include "rectune/config.hpp"
#include "rectune/core/error.hpp"
#include "rectune/core/io.hpp"
#include "rectune/core/rng.hpp"
#include "rectune/llm/client.hpp"
#include "rectune/llm/extract.hpp"
#include "rectune/loop/ablation.hpp"
#include "rectune/loop/benchmark.hpp"
#include "rectune/loop/loop.hpp"
#include "rectune/loop/manifest.hpp"
#include "rectune/loop/report.hpp"
#include "rectune/memory/diversity.hpp"
#include "rectune/memory/pareto.hpp"
#include "rectune/memory/store.hpp"
#include "rectune/memory/task_record.hpp"
#include "rectune/sim/evaluator.hpp"
#include "rectune/sim/feedback.hpp"
#include "rectune/sim/pipeline.hpp"
#include "rectune/sim/scenario.hpp"
#include "rectune/sim/utility.hpp"
#include "rectune/skillhub/prompts.hpp"
#include "rectune/skillhub/repository.hpp"
#include "rectune/skillhub/skill.hpp"
