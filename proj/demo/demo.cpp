// Copyright 2026 The sparsetrim Authors
// SPDX-License-Identifier: Apache-2.0

// End-to-end walk through the library: synthesize a fixture, prune it,
// price the result, then score a pair of Hindi transcripts.

#include <cstdio>

#include "sparsetrim/sparsetrim.hpp"

int main()
{
    using namespace sparsetrim;

    const auto ckpt = synth_checkpoint(profile_fixture_recipe(Profile::Net1, 32), 7);
    const auto pruned = prune_model(ckpt, {ScheduleId::TW1, kDefaultEta});
    std::printf("pruned %zu of %zu prunable parameters (%.1f%%)\n", pruned.report.params_pruned,
                pruned.report.params_before, 100.0 * pruned.report.pruned_fraction);

    const auto cost = cost_report(ckpt, pruned.checkpoint, kDefaultTokens, MemoryRepr::ColumnCompact);
    std::printf("memory -%.2f%%  FLOPs -%.2f%%\n", cost.memory_reduction_pct, cost.flops_reduction_pct);

    const auto lex = VariantLexicon::seed();
    const auto r = wer("मुझे बताओ, आप कहाँ गये थे।", "मुझे बताइए आप कहां गए थे", NormalizerMode::Balanced, lex);
    std::printf("balanced WER %.3f (S=%zu D=%zu I=%zu)\n", r.wer, r.edits.substitutions, r.edits.deletions,
                r.edits.insertions);
    return 0;
}
