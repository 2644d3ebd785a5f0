#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dminer/dataset.hpp"
#include "dminer/meta.hpp"

namespace dminer::testkit {

/// Numeric raw dataset from a feature matrix and string labels.
RawDataset numeric_raw(const std::string& name, const Matrix& x, const std::vector<std::string>& labels);

/// Preprocessed table built from numeric features and string labels.
DataTable make_table(const std::string& name, const Matrix& x, const std::vector<std::string>& labels);

/// Isotropic Gaussian blobs, one per class, centers `separation` apart along
/// distinct axes.
DataTable blobs(const std::string& name, std::size_t per_class, std::size_t n_classes, std::size_t dims,
                double sigma, double separation, std::uint64_t seed);

/// Two classes drawn from the same Gaussian.
DataTable identical_classes(const std::string& name, std::size_t per_class, std::uint64_t seed);

/// `distinct` points with random labels, each repeated `copies` times.
DataTable duplicated_points(const std::string& name, std::size_t distinct, std::size_t copies, std::uint64_t seed);

/// First CV seed from `start` whose folds leave every duplicated point of
/// `duplicated_points(.., distinct, ..)` with a copy in each training split.
std::uint64_t seed_keeping_training_copies(const DataTable& table, std::size_t distinct, std::size_t k,
                                           std::uint64_t start = 0);

/// Tight clusters whose labels are assigned at random, balanced over classes.
/// Only a narrow kernel separates them, so large gamma wins. Each point's
/// label is replaced by another class with probability `label_noise`.
DataTable micro_clusters(const std::string& name, std::size_t clusters, std::size_t per_cluster, std::size_t dims,
                         std::size_t n_classes, double sigma, std::uint64_t seed, double label_noise = 0.0);

/// Heterogeneous micro-cluster datasets, each with at most 300 instances and
/// 10% label noise, so no setting reaches perfect accuracy.
std::vector<DataTable> high_gamma_suite(std::size_t count, std::uint64_t seed);

/// Small generic tables for pipeline plumbing tests.
std::vector<DataTable> small_blob_suite(std::size_t count, std::uint64_t seed);

/// Writes a table as a CSV with header f0..fp-1,class.
void write_csv(const std::filesystem::path& path, const DataTable& table);

/// Meta-examples whose label is default_opt iff nr_inst < threshold; nr_inst
/// avoids (gap_low, gap_high) so the boundary is learnable.
std::vector<MetaExample> planted_meta_examples(std::size_t n, double gap_low, double gap_high, std::uint64_t seed);

}  // namespace dminer::testkit
