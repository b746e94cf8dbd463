#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "aerorecog/augment.hpp"
#include "aerorecog/config.hpp"
#include "aerorecog/image.hpp"
#include "aerorecog/subspace.hpp"

namespace aerorecog {

/// Estimation settings baked into a gallery; matching a query against it
/// must use the same settings or the comparison is meaningless.
struct GalleryFingerprint {
    double energy = 0.95;
    int d_max = 10;
    int t = 3;              // cosines averaged by similarity()
    int template_size = 100;

    bool operator==(const GalleryFingerprint&) const = default;
    static GalleryFingerprint from_config(const PipelineConfig& cfg);
};

/// Label -> appearance subspace. Immutable once enrollment finishes;
/// all entries share the ambient dimension implied by template_size.
struct Gallery {
    GalleryFingerprint fingerprint;
    std::map<std::string, Subspace> entries;  // ordered: deterministic iteration

    bool empty() const { return entries.empty(); }
    int size() const { return int(entries.size()); }
};

/// Pools every view of every set and estimates the label's subspace.
/// Throws DuplicateLabel; size mismatches surface as ConfigMismatch.
void enroll(Gallery& g, const std::string& label, const std::vector<ViewSet>& views);
void enroll(Gallery& g, const std::string& label, const std::vector<Image>& views);

struct MatchReport {
    std::string query_id;
    std::vector<std::pair<std::string, double>> ranking;  // similarity descending
    std::string decision;  // rank-1 label
    bool tie = false;      // top similarity shared; lexicographic winner chosen
};

/// Builds the query subspace under the gallery's fingerprint and ranks
/// every entry by subspace similarity. Throws EmptyGallery; a query whose
/// views disagree with the gallery's template size is a ConfigMismatch.
MatchReport identify(const Gallery& g, const std::vector<Image>& query_views,
                     const std::string& query_id = "query");
MatchReport identify(const Gallery& g, const Subspace& query,
                     const std::string& query_id = "query");

struct ConfusionMatrix {
    std::vector<std::string> labels;
    std::vector<std::vector<long>> counts;  // [true label][decided label]

    long row_total(int i) const;
    long total_queries() const;
    long total_errors() const;
    double rank1_rate() const;  // fraction of queries decided correctly
    /// Off-diagonal cell as a percentage of the row's queries.
    double cell_percent(int i, int j) const;
    double row_error_percent(int i) const;

    /// Header row/column of labels, off-diagonal percentages with one
    /// decimal, "--" on the diagonal, per-row error total in the last column.
    std::string to_csv() const;
    /// Raw counts alongside the rates so any split size is auditable.
    std::string to_json() const;
};

/// One query unit: a set of views sharing a true label.
struct QuerySet {
    std::string true_label;
    std::string id;
    std::vector<Image> views;
};

/// Runs identify per query and accumulates decisions. Throws UnknownLabel
/// when a query's true label is not enrolled.
ConfusionMatrix evaluate_confusion(const std::vector<QuerySet>& queries, const Gallery& g);

// ---- burst-level evaluation protocols -------------------------------------

/// A tracking burst reduced to its canonical templates (re-warped to the
/// initial pose and scale-normalized), before view augmentation. One burst
/// is one training/query unit; splits never divide a burst.
struct TemplateBurst {
    std::string label;
    std::string burst_id;
    std::vector<Image> templates;
};

struct EvaluationResult {
    ConfusionMatrix confusion;
    std::vector<MatchReport> reports;  // one per query burst, dataset order
    double rank1_rate = 0.0;
};

struct SweepPoint {
    double fraction_removed = 0.0;
    double recognition_rate = 0.0;        // mean across seeds, in [0,1]
    std::vector<double> per_seed_rates;
};

/// Shared engine for the burst protocols. Expanding every template into a
/// rotational view set and forming its Gram matrix is the expensive part,
/// so it happens once per target here; leave-one-burst-out galleries and
/// sweep subsamples are then cheap Gram submatrices re-centered in place.
class BurstEvaluator {
  public:
    BurstEvaluator(std::vector<TemplateBurst> dataset, const PipelineConfig& cfg);
    ~BurstEvaluator();
    BurstEvaluator(const BurstEvaluator&) = delete;
    BurstEvaluator& operator=(const BurstEvaluator&) = delete;

    /// Each burst queries a gallery whose own-label entry was re-estimated
    /// without that burst; every other entry uses all of its label's bursts.
    EvaluationResult leave_one_burst_out();

    /// Training-data reduction: per target and seed, one random permutation
    /// of its templates defines nested removal sets, so larger fractions
    /// discard supersets of smaller ones ("gradual removal"). Queries are
    /// never subsampled. Rates come from the same leave-one-burst-out
    /// protocol; each returned point averages the given seeds.
    std::vector<SweepPoint> sweep(const std::vector<double>& fractions,
                                  const std::vector<std::uint64_t>& seeds);

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Convenience wrappers over a throwaway evaluator.
EvaluationResult leave_one_burst_out(const std::vector<TemplateBurst>& dataset,
                                     const PipelineConfig& cfg);
std::vector<SweepPoint> data_reduction_sweep(const std::vector<TemplateBurst>& dataset,
                                             const PipelineConfig& cfg,
                                             const std::vector<double>& fractions,
                                             const std::vector<std::uint64_t>& seeds);

/// Two-column CSV: fraction_removed,recognition_rate.
std::string sweep_to_csv(const std::vector<SweepPoint>& curve);

// ---- persistence ----------------------------------------------------------

/// Writes gallery.json (fingerprint + label -> file map) plus one subspace
/// file per entry into dir. load_gallery rejects malformed trees (IoError).
void save_gallery(const Gallery& g, const std::filesystem::path& dir);
Gallery load_gallery(const std::filesystem::path& dir);

}  // namespace aerorecog
