#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

namespace qmeta {

// m labeled points: points is m x d, labels[i] in {-1, +1}.
struct LabeledDataset {
    std::string name;
    Eigen::MatrixXd points;
    Eigen::VectorXd labels;

    Eigen::Index size() const { return points.rows(); }
    Eigen::Index dim() const { return points.cols(); }
};

// Two 2-d Gaussian clouds. Both covariances must be symmetric positive
// definite; sampling is mu + L z with L the Cholesky factor.
struct GaussianSpec {
    Eigen::Vector2d mu1{2.0, 3.0};
    Eigen::Matrix2d sigma1{{10.0, 1.0}, {1.0, 4.0}};
    Eigen::Vector2d mu2{2.0, 3.0};
    Eigen::Matrix2d sigma2{{5.0, 2.0}, {2.0, 5.0}};
    int n_per_class = 100;
};

LabeledDataset gen_gaussian(const GaussianSpec& spec, std::uint64_t seed);

// Two interleaved planar spirals scaled into the unit disk: the positive
// class traces (t cos t, t sin t)/(3 pi) for t uniform on (0, 3 pi) and the
// negative class its mirror image, both with additive Gaussian noise.
LabeledDataset gen_spirals(int n_per_class, double noise_std, std::uint64_t seed);

// Points uniform on two concentric spheres in R^3; the inner sphere is the
// positive class.
LabeledDataset gen_spheres(int n_per_class, double r_inner, double r_outer,
                           std::uint64_t seed);

// Loads the bundled four-feature flower CSV (header sepal_length,sepal_width,
// petal_length,petal_width,species), keeping two species mapped to +1 / -1.
LabeledDataset load_iris_binary(const std::string& path,
                                const std::string& species_pos = "setosa",
                                const std::string& species_neg = "versicolor");

// Writes header x0,...,x{d-1},label and one row per point.
void export_csv(const LabeledDataset& data, const std::string& path);

}  // namespace qmeta
