#include "pqt/bench.hpp"

#include <algorithm>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "pqt/parallel.hpp"

namespace pqt {

double RecallReport::recall_at(std::uint32_t r) const {
    for (const auto& [rr, frac] : recall) {
        if (rr == r) {
            return frac;
        }
    }
    return 0.0;
}

double recall_fraction(const std::vector<QueryResult>& results, const GroundTruth& gt,
                       std::uint32_t r) {
    if (results.size() != gt.count()) {
        throw std::invalid_argument("recall_fraction: result/ground-truth count mismatch");
    }
    if (results.empty()) {
        return 0.0;
    }
    std::size_t hits = 0;
    for (std::size_t q = 0; q < results.size(); ++q) {
        const std::int32_t truth = gt.row(q)[0];
        const auto& ids = results[q].ids;
        const std::size_t depth = std::min<std::size_t>(r, ids.size());
        for (std::size_t i = 0; i < depth; ++i) {
            if (static_cast<std::int32_t>(ids[i]) == truth) {
                ++hits;
                break;
            }
        }
    }
    return static_cast<double>(hits) / static_cast<double>(results.size());
}

GroundTruth make_ground_truth(const VectorSet& db, const VectorSet& queries, std::uint32_t depth,
                              int threads) {
    if (queries.count() > 0 && db.count() > 0 && queries.dim != db.dim) {
        throw std::invalid_argument("make_ground_truth: dimension mismatch");
    }
    depth = static_cast<std::uint32_t>(std::min<std::size_t>(depth, db.count()));
    GroundTruth gt;
    gt.depth = depth;
    gt.ids.resize(queries.count() * depth);
    parallel_for(queries.count(), threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t q = begin; q < end; ++q) {
            QueryResult res = brute_force_knn(db, queries.row(q), depth);
            for (std::size_t i = 0; i < depth; ++i) {
                gt.ids[q * depth + i] = static_cast<std::int32_t>(res.ids[i]);
            }
        }
    });
    return gt;
}

VectorSet synth_clustered(std::size_t n, std::uint32_t dim, std::uint32_t blobs, float sigma,
                          std::uint64_t seed) {
    if (dim == 0 || blobs == 0) {
        throw std::invalid_argument("synth_clustered: dim and blobs must be positive");
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> mean_dist(0.0f, 255.0f);
    std::vector<float> means(static_cast<std::size_t>(blobs) * dim);
    for (auto& v : means) {
        v = mean_dist(rng);
    }

    VectorSet set;
    set.dim = dim;
    set.data.resize(n * dim);
    std::uniform_int_distribution<std::uint32_t> pick(0, blobs - 1);
    std::normal_distribution<float> noise(0.0f, 1.0f);
    for (std::size_t i = 0; i < n; ++i) {
        const float* mean = means.data() + static_cast<std::size_t>(pick(rng)) * dim;
        float* dst = set.row(i);
        if (sigma > 0.0f) {
            for (std::uint32_t d = 0; d < dim; ++d) {
                dst[d] = mean[d] + sigma * noise(rng);
            }
        } else {
            std::copy(mean, mean + dim, dst);
        }
    }
    return set;
}

RecallReport run_benchmark(const PqtIndex& index, const VectorSet& queries,
                           const GroundTruth& gt, std::uint32_t k, int threads) {
    // Warmup pass; its timings (cold caches, page faults) are discarded.
    knn_query_batch(index, queries, k, threads);
    std::vector<QueryResult> results = knn_query_batch(index, queries, k, threads);

    RecallReport report;
    report.config = index.config;
    report.k = k;
    report.queries = queries.count();
    for (std::uint32_t r : {1u, 10u, 100u}) {
        report.recall.emplace_back(r, recall_fraction(results, gt, r));
    }
    if (!results.empty()) {
        double inv = 1.0 / (1000.0 * static_cast<double>(results.size())); // us -> ms mean
        for (const auto& res : results) {
            report.traversal_ms += res.stats.traversal_us * inv;
            report.bin_selection_ms += res.stats.bin_selection_us * inv;
            report.vector_proposal_ms += res.stats.vector_proposal_us * inv;
            report.rerank_ms += res.stats.rerank_us * inv;
        }
        report.total_ms = report.traversal_ms + report.bin_selection_ms +
                          report.vector_proposal_ms + report.rerank_ms;
    }
    return report;
}

namespace {

void append_config(std::ostringstream& out, const PqtConfig& c) {
    out << "config.dim=" << c.dim << '\n'
        << "config.p_tree=" << c.p_tree << '\n'
        << "config.k1=" << c.k1 << '\n'
        << "config.k2=" << c.k2 << '\n'
        << "config.w=" << c.w << '\n'
        << "config.p_line=" << c.p_line << '\n'
        << "config.hash_size=" << c.hash_size << '\n'
        << "config.candidate_budget=" << c.candidate_budget << '\n'
        << "config.rerank_exact=" << c.rerank_exact << '\n'
        << "config.resort_bins=" << (c.resort_bins ? 1 : 0) << '\n'
        << "config.train_iters=" << c.train_iters << '\n'
        << "config.seed=" << c.seed << '\n';
}

nlohmann::json config_json(const PqtConfig& c) {
    return {
        {"dim", c.dim},
        {"p_tree", c.p_tree},
        {"k1", c.k1},
        {"k2", c.k2},
        {"w", c.w},
        {"p_line", c.p_line},
        {"hash_size", c.hash_size},
        {"candidate_budget", c.candidate_budget},
        {"rerank_exact", c.rerank_exact},
        {"resort_bins", c.resort_bins},
        {"train_iters", c.train_iters},
        {"seed", c.seed},
    };
}

} // namespace

std::string format_report(const RecallReport& report) {
    std::ostringstream out;
    append_config(out, report.config);
    out << "queries=" << report.queries << '\n';
    out << "k=" << report.k << '\n';
    for (const auto& [r, frac] : report.recall) {
        out << "recall@" << r << '=' << frac << '\n';
    }
    out << "stage_ms.traversal=" << report.traversal_ms << '\n'
        << "stage_ms.bin_selection=" << report.bin_selection_ms << '\n'
        << "stage_ms.vector_proposal=" << report.vector_proposal_ms << '\n'
        << "stage_ms.rerank=" << report.rerank_ms << '\n'
        << "stage_ms.total=" << report.total_ms << '\n';
    if (report.total_ms > 0.0) {
        auto pct = [&](double v) { return 100.0 * v / report.total_ms; };
        out << "stage_pct.traversal=" << pct(report.traversal_ms) << '\n'
            << "stage_pct.bin_selection=" << pct(report.bin_selection_ms) << '\n'
            << "stage_pct.vector_proposal=" << pct(report.vector_proposal_ms) << '\n'
            << "stage_pct.rerank=" << pct(report.rerank_ms) << '\n';
    }
    return out.str();
}

std::string report_json(const RecallReport& report) {
    nlohmann::json recall;
    for (const auto& [r, frac] : report.recall) {
        recall["recall@" + std::to_string(r)] = frac;
    }
    nlohmann::json doc = {
        {"config", config_json(report.config)},
        {"queries", report.queries},
        {"k", report.k},
        {"recall", recall},
        {"stage_ms",
         {{"traversal", report.traversal_ms},
          {"bin_selection", report.bin_selection_ms},
          {"vector_proposal", report.vector_proposal_ms},
          {"rerank", report.rerank_ms},
          {"total", report.total_ms}}},
    };
    return doc.dump(2);
}

} // namespace pqt
