#include "aerorecog/recognize.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <set>

#include <nlohmann/json.hpp>

#include "aerorecog/errors.hpp"

namespace aerorecog {

namespace {

std::uint64_t label_salt(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

void check_view_size(const Image& img, int template_size, const std::string& what) {
    if (img.width() != template_size || img.height() != template_size)
        throw ConfigMismatch(what + " is " + std::to_string(img.width()) + "x" +
                             std::to_string(img.height()) + ", gallery template size is " +
                             std::to_string(template_size));
}

std::string format_percent(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", v);
    return buf;
}

}  // namespace

GalleryFingerprint GalleryFingerprint::from_config(const PipelineConfig& cfg) {
    return {cfg.energy, cfg.d_max, cfg.similarity_t, cfg.template_size};
}

void enroll(Gallery& g, const std::string& label, const std::vector<Image>& views) {
    if (g.entries.count(label))
        throw DuplicateLabel("label already enrolled: " + label);
    for (const Image& v : views) check_view_size(v, g.fingerprint.template_size, "view");
    Subspace s = estimate_subspace(views, g.fingerprint.energy, g.fingerprint.d_max);
    g.entries.emplace(label, std::move(s));
}

void enroll(Gallery& g, const std::string& label, const std::vector<ViewSet>& views) {
    std::vector<Image> pool;
    for (const ViewSet& vs : views)
        for (const Image& v : vs.views) pool.push_back(v);
    enroll(g, label, pool);
}

MatchReport identify(const Gallery& g, const Subspace& query, const std::string& query_id) {
    if (g.empty()) throw EmptyGallery("gallery has no entries");
    const int ambient = g.entries.begin()->second.ambient();
    if (query.ambient() != ambient)
        throw ConfigMismatch(
                    "query ambient " + std::to_string(query.ambient()) +
                        " does not match gallery ambient " + std::to_string(ambient));

    MatchReport report;
    report.query_id = query_id;
    for (const auto& [label, entry] : g.entries) {
        const double sim = similarity(canonical_correlations(query, entry), g.fingerprint.t);
        report.ranking.emplace_back(label, sim);
    }
    std::stable_sort(report.ranking.begin(), report.ranking.end(),
                     [](const auto& a, const auto& b) {
                         if (a.second != b.second) return a.second > b.second;
                         return a.first < b.first;
                     });
    report.decision = report.ranking.front().first;
    report.tie = report.ranking.size() > 1 &&
                 report.ranking[0].second == report.ranking[1].second;
    return report;
}

MatchReport identify(const Gallery& g, const std::vector<Image>& query_views,
                     const std::string& query_id) {
    if (g.empty()) throw EmptyGallery("gallery has no entries");
    for (const Image& v : query_views)
        check_view_size(v, g.fingerprint.template_size, "query view");
    Subspace q = estimate_subspace(query_views, g.fingerprint.energy, g.fingerprint.d_max);
    return identify(g, q, query_id);
}

// ---- confusion matrix -----------------------------------------------------

long ConfusionMatrix::row_total(int i) const {
    return std::accumulate(counts[size_t(i)].begin(), counts[size_t(i)].end(), 0L);
}

long ConfusionMatrix::total_queries() const {
    long n = 0;
    for (int i = 0; i < int(labels.size()); ++i) n += row_total(i);
    return n;
}

long ConfusionMatrix::total_errors() const {
    long n = 0;
    for (size_t i = 0; i < labels.size(); ++i)
        for (size_t j = 0; j < labels.size(); ++j)
            if (i != j) n += counts[i][j];
    return n;
}

double ConfusionMatrix::rank1_rate() const {
    const long n = total_queries();
    return n == 0 ? 0.0 : double(n - total_errors()) / double(n);
}

double ConfusionMatrix::cell_percent(int i, int j) const {
    const long n = row_total(i);
    return n == 0 ? 0.0 : 100.0 * double(counts[size_t(i)][size_t(j)]) / double(n);
}

double ConfusionMatrix::row_error_percent(int i) const {
    const long n = row_total(i);
    if (n == 0) return 0.0;
    long errors = 0;
    for (size_t j = 0; j < labels.size(); ++j)
        if (int(j) != i) errors += counts[size_t(i)][j];
    return 100.0 * double(errors) / double(n);
}

std::string ConfusionMatrix::to_csv() const {
    std::string out = "label";
    for (const auto& l : labels) out += "," + l;
    out += ",total\n";
    for (int i = 0; i < int(labels.size()); ++i) {
        out += labels[size_t(i)];
        for (int j = 0; j < int(labels.size()); ++j)
            out += i == j ? ",--" : "," + format_percent(cell_percent(i, j));
        out += "," + format_percent(row_error_percent(i)) + "\n";
    }
    return out;
}

std::string ConfusionMatrix::to_json() const {
    nlohmann::json j;
    j["labels"] = labels;
    j["counts"] = counts;
    std::vector<long> totals;
    std::vector<std::vector<nlohmann::json>> percents;
    std::vector<double> row_errors;
    for (int i = 0; i < int(labels.size()); ++i) {
        totals.push_back(row_total(i));
        row_errors.push_back(row_error_percent(i));
        std::vector<nlohmann::json> row;
        for (int k = 0; k < int(labels.size()); ++k)
            row.push_back(i == k ? nlohmann::json() : nlohmann::json(cell_percent(i, k)));
        percents.push_back(std::move(row));
    }
    j["row_totals"] = totals;
    j["error_percent"] = percents;       // null on the diagonal
    j["row_error_percent"] = row_errors;
    j["total_queries"] = total_queries();
    j["total_errors"] = total_errors();
    j["rank1_rate"] = rank1_rate();
    return j.dump(2);
}

ConfusionMatrix evaluate_confusion(const std::vector<QuerySet>& queries, const Gallery& g) {
    if (g.empty()) throw EmptyGallery("gallery has no entries");
    ConfusionMatrix cm;
    std::map<std::string, int> index;
    for (const auto& [label, _] : g.entries) {
        index.emplace(label, int(cm.labels.size()));
        cm.labels.push_back(label);
    }
    cm.counts.assign(cm.labels.size(), std::vector<long>(cm.labels.size(), 0));
    for (const QuerySet& q : queries) {
        auto it = index.find(q.true_label);
        if (it == index.end())
            throw UnknownLabel("query label not enrolled: " + q.true_label);
        const MatchReport r = identify(g, q.views, q.id);
        cm.counts[size_t(it->second)][size_t(index.at(r.decision))] += 1;
    }
    return cm;
}

// ---- burst evaluation engine ----------------------------------------------

struct BurstEvaluator::Impl {
    std::vector<TemplateBurst> dataset;
    PipelineConfig cfg;
    GalleryFingerprint fp;
    int views_per_template = 0;

    struct Target {
        std::string label;
        std::vector<int> bursts;                    // dataset indices, dataset order
        std::vector<int> tpl_burst;                 // template -> position in bursts
        std::vector<std::pair<int, int>> tpl_cols;  // template -> [begin,end) columns
        int n_templates = 0;
        int n_cols = 0;
        Eigen::MatrixXd gram;                       // raw (uncentered) view inner products
        std::vector<Subspace> query;                // per burst position
    };
    std::vector<Target> targets;                    // label-sorted
    std::vector<std::pair<int, int>> burst_loc;     // dataset burst -> (target, position)

    Impl(std::vector<TemplateBurst> ds, const PipelineConfig& c)
        : dataset(std::move(ds)), cfg(c), fp(GalleryFingerprint::from_config(c)) {
        cfg.validate();
        if (dataset.empty())
            throw InsufficientSamples("evaluation dataset is empty");
        views_per_template = int(std::lround(360.0 / cfg.rotation_step));

        std::map<std::string, std::vector<int>> by_label;
        for (int i = 0; i < int(dataset.size()); ++i) {
            const TemplateBurst& b = dataset[size_t(i)];
            if (b.templates.empty())
                throw InsufficientSamples(
                            "burst has no templates: " + b.burst_id);
            for (const Image& t : b.templates)
                check_view_size(t, fp.template_size, "template of " + b.burst_id);
            by_label[b.label].push_back(i);
        }

        burst_loc.resize(dataset.size());
        for (const auto& [label, ids] : by_label) {
            Target t;
            t.label = label;
            t.bursts = ids;
            for (int pos = 0; pos < int(ids.size()); ++pos) {
                burst_loc[size_t(ids[size_t(pos)])] = {int(targets.size()), pos};
                for (size_t k = 0; k < dataset[size_t(ids[size_t(pos)])].templates.size();
                     ++k) {
                    t.tpl_burst.push_back(pos);
                    t.tpl_cols.emplace_back(t.n_cols, t.n_cols + views_per_template);
                    t.n_cols += views_per_template;
                    ++t.n_templates;
                }
            }
            targets.push_back(std::move(t));
        }

        // One pass per target: render the view matrix, cache its Gram, and
        // estimate the burst query subspaces while the views are in memory.
        for (Target& t : targets) {
            Eigen::MatrixXd views = make_views(t);
            t.gram.noalias() = views.transpose() * views;
            for (int pos = 0; pos < int(t.bursts.size()); ++pos)
                t.query.push_back(estimate(views, t, templates_of_burst(t, pos)));
        }
    }

    std::vector<int> templates_of_burst(const Target& t, int pos) const {
        std::vector<int> out;
        for (int i = 0; i < t.n_templates; ++i)
            if (t.tpl_burst[size_t(i)] == pos) out.push_back(i);
        return out;
    }

    std::vector<int> templates_excluding_burst(const Target& t, int pos) const {
        std::vector<int> out;
        for (int i = 0; i < t.n_templates; ++i)
            if (t.tpl_burst[size_t(i)] != pos) out.push_back(i);
        return out;
    }

    /// Rebuilds the target's full augmented view matrix (deterministic, so
    /// it can be dropped between phases and regenerated on demand).
    Eigen::MatrixXd make_views(const Target& t) const {
        const int ambient = fp.template_size * fp.template_size;
        Eigen::MatrixXd views(ambient, t.n_cols);
        int col = 0;
        for (int bi : t.bursts) {
            for (const Image& tpl : dataset[size_t(bi)].templates) {
                ViewSet vs = generate_views(tpl, cfg.rotation_step);
                for (const Image& v : vs.views) {
                    for (int i = 0; i < ambient; ++i) views(i, col) = v.data()[size_t(i)];
                    ++col;
                }
            }
        }
        return views;
    }

    /// Subspace of the chosen templates' pooled views. The centered Gram of
    /// any column subset follows from the cached raw Gram by subtracting the
    /// subset's row/column means, so no per-subset data products are needed;
    /// the views matrix only supplies the final basis columns.
    Subspace estimate(const Eigen::MatrixXd& views, const Target& t,
                      const std::vector<int>& tpl_keep) const {
        std::vector<int> cols;
        for (int tpl : tpl_keep)
            for (int c = t.tpl_cols[size_t(tpl)].first; c < t.tpl_cols[size_t(tpl)].second;
                 ++c)
                cols.push_back(c);
        const int n = int(cols.size());
        if (n < 2)
            throw InsufficientSamples(
                        "subset of " + t.label + " has " + std::to_string(n) + " views");

        Eigen::MatrixXd sub(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                sub(i, j) = t.gram(cols[size_t(i)], cols[size_t(j)]);
        Eigen::VectorXd rm = sub.rowwise().mean();
        const double tm = rm.mean();
        sub.colwise() -= rm;
        sub.rowwise() -= rm.transpose();
        sub.array() += tm;

        GramSpectrum spec = analyze_centered_gram(sub, fp.energy, fp.d_max);

        Eigen::VectorXd mean = Eigen::VectorXd::Zero(views.rows());
        Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(views.rows(), spec.d);
        for (int i = 0; i < n; ++i) {
            const auto col = views.col(cols[size_t(i)]);
            mean += col;
            acc.noalias() += col * spec.vectors.row(i).head(spec.d);
        }
        mean /= double(n);
        // Centered projection: sum_i (x_i - m) V(i,k) = acc_k - m * sum_i V(i,k).
        for (int k = 0; k < spec.d; ++k) {
            acc.col(k) -= mean * spec.vectors.col(k).sum();
            acc.col(k) /= std::sqrt(spec.values[k]);
        }
        orthonormalize_columns(acc);

        Subspace out;
        out.basis = std::move(acc);
        out.mean = std::move(mean);
        out.energy = fp.energy;
        return out;
    }

    double sim(const Subspace& a, const Subspace& b) const {
        return similarity(canonical_correlations(a, b), fp.t);
    }

    /// Decision for one query given its similarity to every target, with the
    /// same lexicographic tie-break identify() uses (targets are label-sorted).
    int decide(const std::vector<double>& sims) const {
        int best = 0;
        for (int ti = 1; ti < int(targets.size()); ++ti)
            if (sims[size_t(ti)] > sims[size_t(best)]) best = ti;
        return best;
    }

    EvaluationResult evaluate(const std::vector<std::vector<double>>& sims_per_query) const {
        EvaluationResult out;
        out.confusion.labels.reserve(targets.size());
        for (const Target& t : targets) out.confusion.labels.push_back(t.label);
        out.confusion.counts.assign(targets.size(),
                                    std::vector<long>(targets.size(), 0));
        for (int q = 0; q < int(dataset.size()); ++q) {
            const auto& sims = sims_per_query[size_t(q)];
            MatchReport r;
            r.query_id = dataset[size_t(q)].burst_id;
            for (int ti = 0; ti < int(targets.size()); ++ti)
                r.ranking.emplace_back(targets[size_t(ti)].label, sims[size_t(ti)]);
            std::stable_sort(r.ranking.begin(), r.ranking.end(),
                             [](const auto& a, const auto& b) {
                                 if (a.second != b.second) return a.second > b.second;
                                 return a.first < b.first;
                             });
            r.decision = r.ranking.front().first;
            r.tie = r.ranking.size() > 1 && r.ranking[0].second == r.ranking[1].second;
            const int true_ti = burst_loc[size_t(q)].first;
            const int decided_ti = decide(sims);
            out.confusion.counts[size_t(true_ti)][size_t(decided_ti)] += 1;
            out.reports.push_back(std::move(r));
        }
        out.rank1_rate = out.confusion.rank1_rate();
        return out;
    }
};

BurstEvaluator::BurstEvaluator(std::vector<TemplateBurst> dataset, const PipelineConfig& cfg)
    : impl_(std::make_unique<Impl>(std::move(dataset), cfg)) {}

BurstEvaluator::~BurstEvaluator() = default;

EvaluationResult BurstEvaluator::leave_one_burst_out() {
    Impl& im = *impl_;
    std::vector<Subspace> full(im.targets.size());
    std::vector<std::vector<Subspace>> loo(im.targets.size());
    for (int ti = 0; ti < int(im.targets.size()); ++ti) {
        const auto& t = im.targets[size_t(ti)];
        Eigen::MatrixXd views = im.make_views(t);
        std::vector<int> all(size_t(t.n_templates));
        std::iota(all.begin(), all.end(), 0);
        full[size_t(ti)] = im.estimate(views, t, all);
        for (int pos = 0; pos < int(t.bursts.size()); ++pos)
            loo[size_t(ti)].push_back(
                im.estimate(views, t, im.templates_excluding_burst(t, pos)));
    }

    std::vector<std::vector<double>> sims(im.dataset.size(),
                                          std::vector<double>(im.targets.size(), 0.0));
    for (int q = 0; q < int(im.dataset.size()); ++q) {
        const auto [qt, qpos] = im.burst_loc[size_t(q)];
        const Subspace& query = im.targets[size_t(qt)].query[size_t(qpos)];
        for (int ti = 0; ti < int(im.targets.size()); ++ti) {
            const Subspace& entry =
                ti == qt ? loo[size_t(ti)][size_t(qpos)] : full[size_t(ti)];
            sims[size_t(q)][size_t(ti)] = im.sim(query, entry);
        }
    }
    return im.evaluate(sims);
}

std::vector<SweepPoint> BurstEvaluator::sweep(const std::vector<double>& fractions,
                                              const std::vector<std::uint64_t>& seeds) {
    Impl& im = *impl_;
    if (fractions.empty() || seeds.empty())
        throw ConfigInvalid("sweep needs fractions and seeds");
    for (double f : fractions)
        if (!(f >= 0.0) || f >= 1.0)
            throw ConfigInvalid("sweep fractions must lie in [0, 1)");

    const int S = int(seeds.size()), F = int(fractions.size());
    const int Q = int(im.dataset.size()), T = int(im.targets.size());
    // sims[s][f][q][ti]: query q's similarity to the gallery entry of target
    // ti under seed s and fraction f (the leave-one-burst-out variant when
    // ti owns the query).
    std::vector<double> sims(size_t(S) * F * Q * T, 0.0);
    auto at = [&](int s, int f, int q, int ti) -> double& {
        return sims[size_t(((s * F + f) * Q + q) * T + ti)];
    };

    for (int ti = 0; ti < T; ++ti) {
        const auto& t = im.targets[size_t(ti)];
        Eigen::MatrixXd views = im.make_views(t);
        for (int s = 0; s < S; ++s) {
            std::vector<int> perm(size_t(t.n_templates));
            std::iota(perm.begin(), perm.end(), 0);
            std::mt19937_64 rng(seeds[size_t(s)] ^ label_salt(t.label));
            std::shuffle(perm.begin(), perm.end(), rng);
            for (int f = 0; f < F; ++f) {
                // Nested removal: drop the permutation's first round(f*n)
                // templates, always keeping at least one.
                int n_remove = int(std::lround(fractions[size_t(f)] * t.n_templates));
                n_remove = std::min(n_remove, t.n_templates - 1);
                std::vector<char> removed(size_t(t.n_templates), 0);
                for (int i = 0; i < n_remove; ++i) removed[size_t(perm[size_t(i)])] = 1;
                std::vector<int> kept;
                for (int i = 0; i < t.n_templates; ++i)
                    if (!removed[size_t(i)]) kept.push_back(i);

                const Subspace full = im.estimate(views, t, kept);
                std::vector<Subspace> loo;
                for (int pos = 0; pos < int(t.bursts.size()); ++pos) {
                    std::vector<int> keep_b;
                    for (int i : kept)
                        if (t.tpl_burst[size_t(i)] != pos) keep_b.push_back(i);
                    if (keep_b.empty()) {
                        // Every surviving template sits in the held-out burst;
                        // restore the lowest-index removed template outside it
                        // so the entry stays estimable.
                        for (int i = 0; i < t.n_templates; ++i)
                            if (t.tpl_burst[size_t(i)] != pos) {
                                keep_b.push_back(i);
                                break;
                            }
                    }
                    loo.push_back(im.estimate(views, t, keep_b));
                }

                for (int q = 0; q < Q; ++q) {
                    const auto [qt, qpos] = im.burst_loc[size_t(q)];
                    const Subspace& query = im.targets[size_t(qt)].query[size_t(qpos)];
                    const Subspace& entry = qt == ti ? loo[size_t(qpos)] : full;
                    at(s, f, q, ti) = im.sim(query, entry);
                }
            }
        }
    }

    std::vector<SweepPoint> curve;
    for (int f = 0; f < F; ++f) {
        SweepPoint p;
        p.fraction_removed = fractions[size_t(f)];
        for (int s = 0; s < S; ++s) {
            int correct = 0;
            for (int q = 0; q < Q; ++q) {
                std::vector<double> row(static_cast<size_t>(T));
                for (int ti = 0; ti < T; ++ti) row[size_t(ti)] = at(s, f, q, ti);
                if (im.decide(row) == im.burst_loc[size_t(q)].first) ++correct;
            }
            p.per_seed_rates.push_back(double(correct) / double(Q));
        }
        p.recognition_rate =
            std::accumulate(p.per_seed_rates.begin(), p.per_seed_rates.end(), 0.0) /
            double(S);
        curve.push_back(std::move(p));
    }
    return curve;
}

EvaluationResult leave_one_burst_out(const std::vector<TemplateBurst>& dataset,
                                     const PipelineConfig& cfg) {
    BurstEvaluator ev(dataset, cfg);
    return ev.leave_one_burst_out();
}

std::vector<SweepPoint> data_reduction_sweep(const std::vector<TemplateBurst>& dataset,
                                             const PipelineConfig& cfg,
                                             const std::vector<double>& fractions,
                                             const std::vector<std::uint64_t>& seeds) {
    BurstEvaluator ev(dataset, cfg);
    return ev.sweep(fractions, seeds);
}

std::string sweep_to_csv(const std::vector<SweepPoint>& curve) {
    std::string out = "fraction_removed,recognition_rate\n";
    char buf[64];
    for (const SweepPoint& p : curve) {
        std::snprintf(buf, sizeof buf, "%.4f,%.6f\n", p.fraction_removed,
                      p.recognition_rate);
        out += buf;
    }
    return out;
}

// ---- persistence ----------------------------------------------------------

void save_gallery(const Gallery& g, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    nlohmann::json j;
    j["fingerprint"] = {{"energy", g.fingerprint.energy},
                        {"d_max", g.fingerprint.d_max},
                        {"t", g.fingerprint.t},
                        {"template_size", g.fingerprint.template_size}};
    nlohmann::json entries = nlohmann::json::object();
    int idx = 0;
    for (const auto& [label, sub] : g.entries) {
        char name[32];
        std::snprintf(name, sizeof name, "entry_%03d.ssb", idx++);
        save_subspace(sub, dir / name, label);
        entries[label] = name;
    }
    j["entries"] = entries;
    std::ofstream out(dir / "gallery.json", std::ios::trunc);
    if (!out) throw IoError("cannot write " + (dir / "gallery.json").string());
    out << j.dump(2) << "\n";
}

Gallery load_gallery(const std::filesystem::path& dir) {
    std::ifstream in(dir / "gallery.json");
    if (!in) throw IoError("cannot open " + (dir / "gallery.json").string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("malformed gallery.json: " + std::string(e.what()));
    }
    Gallery g;
    try {
        const auto& fp = j.at("fingerprint");
        g.fingerprint.energy = fp.at("energy").get<double>();
        g.fingerprint.d_max = fp.at("d_max").get<int>();
        g.fingerprint.t = fp.at("t").get<int>();
        g.fingerprint.template_size = fp.at("template_size").get<int>();
        for (const auto& [label, file] : j.at("entries").items()) {
            LoadedSubspace ls = load_subspace(dir / file.get<std::string>());
            g.entries.emplace(label, std::move(ls.subspace));
        }
    } catch (const nlohmann::json::exception& e) {
        throw IoError("malformed gallery.json: " + std::string(e.what()));
    }
    const int ambient = g.fingerprint.template_size * g.fingerprint.template_size;
    for (const auto& [label, sub] : g.entries)
        if (sub.ambient() != ambient)
            throw IoError(
                        "gallery entry " + label + " ambient disagrees with fingerprint");
    return g;
}

}  // namespace aerorecog
