#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tuplemax/errors.hpp"
#include "tuplemax/model.hpp"

namespace tuplemax {

// Synthetic corpus layout: classes are assigned round-robin to clusters;
// cluster centers sit ~inter_cluster_sep apart, class means sit at distance
// intra_cluster_sep from their cluster center, so classes sharing a cluster
// are the confusable pairs.
struct CorpusSpec {
  int num_classes = 6;
  int feature_dim = 8;
  int num_clusters = 2;
  double intra_cluster_sep = 1.0;   // class mean offset from its cluster center
  double inter_cluster_sep = 8.0;   // approximate distance between cluster centers
  double frame_noise = 3.0;         // per-frame, per-coordinate Gaussian sigma
  int min_seq_len = 8;
  int max_seq_len = 24;
  int train_per_class = 48;
  int eval_per_class = 32;
  std::uint64_t seed = 1;

  void validate() const;
};

struct Corpus {
  int num_classes = 0;
  int feature_dim = 0;
  std::vector<FeatureSequence> examples;
  std::string split;               // "train" / "eval"; informational
  std::optional<CorpusSpec> spec;  // generation metadata; absent for loaded corpora
};

// Deterministic generation geometry, derived from spec.seed alone. The total
// drift is what a sequence accumulates from its first to its last frame.
struct CorpusGeometry {
  Eigen::MatrixXd cluster_centers;  // num_clusters x d
  Eigen::MatrixXd class_means;      // num_classes x d
  Eigen::MatrixXd class_drifts;     // num_classes x d, total drift per sequence
};

CorpusGeometry corpus_geometry(const CorpusSpec& spec);

// Generates (train, eval). Frames of class k at step t of a length-T
// sequence are mean_k + (t/(T-1)) * drift_k + noise. Center, train and eval
// draws use sub-seeded streams, so the splits are independent and resizing
// one does not perturb the other.
std::pair<Corpus, Corpus> generate_corpus(const CorpusSpec& spec);

// Binary corpus file: text header line "TMAXDATA v1 <N> <d>", then one
// record per example: int32 label, int32 T, then T*d little-endian doubles
// in frame order. Round-trips are bit-exact.
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);
Corpus load_corpus(const std::filesystem::path& path);

}  // namespace tuplemax
