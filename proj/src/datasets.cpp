#include "qmeta/datasets.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "qmeta/errors.hpp"
#include "qmeta/rng.hpp"

namespace qmeta {

namespace {

Eigen::Matrix2d cholesky_or_throw(const Eigen::Matrix2d& sigma, const char* which) {
    if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
        throw ConfigError(std::string(which) + " covariance must be symmetric");
    }
    Eigen::LLT<Eigen::Matrix2d> llt(sigma);
    if (llt.info() != Eigen::Success) {
        throw ConfigError(std::string(which) + " covariance must be positive definite");
    }
    return llt.matrixL();
}

void check_count(int n_per_class) {
    if (n_per_class < 1) throw ConfigError("n_per_class must be >= 1");
}

std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

}  // namespace

LabeledDataset gen_gaussian(const GaussianSpec& spec, std::uint64_t seed) {
    check_count(spec.n_per_class);
    const Eigen::Matrix2d l1 = cholesky_or_throw(spec.sigma1, "class 1");
    const Eigen::Matrix2d l2 = cholesky_or_throw(spec.sigma2, "class 2");

    Rng rng(seed);
    LabeledDataset data;
    data.name = "gaussian";
    data.points.resize(2 * spec.n_per_class, 2);
    data.labels.resize(2 * spec.n_per_class);
    for (int i = 0; i < spec.n_per_class; ++i) {
        const Eigen::Vector2d z(rng.normal(), rng.normal());
        data.points.row(i) = (spec.mu1 + l1 * z).transpose();
        data.labels[i] = 1.0;
    }
    for (int i = 0; i < spec.n_per_class; ++i) {
        const Eigen::Vector2d z(rng.normal(), rng.normal());
        data.points.row(spec.n_per_class + i) = (spec.mu2 + l2 * z).transpose();
        data.labels[spec.n_per_class + i] = -1.0;
    }
    return data;
}

LabeledDataset gen_spirals(int n_per_class, double noise_std, std::uint64_t seed) {
    check_count(n_per_class);
    if (noise_std < 0.0) throw ConfigError("noise_std must be >= 0");

    Rng rng(seed);
    LabeledDataset data;
    data.name = "spirals";
    data.points.resize(2 * n_per_class, 2);
    data.labels.resize(2 * n_per_class);
    const double scale = 3.0 * M_PI;
    for (int cls = 0; cls < 2; ++cls) {
        const double sign = (cls == 0) ? 1.0 : -1.0;
        for (int i = 0; i < n_per_class; ++i) {
            const double t = rng.uniform() * scale;
            const Eigen::Index row = cls * n_per_class + i;
            data.points(row, 0) = t * std::cos(t) / scale + noise_std * rng.normal();
            data.points(row, 1) = sign * t * std::sin(t) / scale + noise_std * rng.normal();
            data.labels[row] = sign;
        }
    }
    return data;
}

LabeledDataset gen_spheres(int n_per_class, double r_inner, double r_outer,
                           std::uint64_t seed) {
    check_count(n_per_class);
    if (r_inner <= 0.0 || r_outer <= 0.0 || r_inner >= r_outer) {
        throw ConfigError("sphere radii must satisfy 0 < r_inner < r_outer");
    }

    Rng rng(seed);
    LabeledDataset data;
    data.name = "spheres";
    data.points.resize(2 * n_per_class, 3);
    data.labels.resize(2 * n_per_class);
    for (int cls = 0; cls < 2; ++cls) {
        const double radius = (cls == 0) ? r_inner : r_outer;
        for (int i = 0; i < n_per_class; ++i) {
            Eigen::Vector3d direction;
            do {
                direction << rng.normal(), rng.normal(), rng.normal();
            } while (direction.norm() < 1e-12);
            const Eigen::Index row = cls * n_per_class + i;
            data.points.row(row) = (radius * direction.normalized()).transpose();
            data.labels[row] = (cls == 0) ? 1.0 : -1.0;
        }
    }
    return data;
}

LabeledDataset load_iris_binary(const std::string& path, const std::string& species_pos,
                                const std::string& species_neg) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open dataset file: " + path);

    std::string line;
    if (!std::getline(in, line) ||
        line != "sepal_length,sepal_width,petal_length,petal_width,species") {
        throw ConfigError("unexpected header in " + path);
    }

    std::vector<Eigen::Vector4d> rows;
    std::vector<double> labels;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto fields = split_csv_row(line);
        if (fields.size() != 5) {
            throw ConfigError(path + ": malformed row at line " + std::to_string(line_no));
        }
        const std::string& species = fields[4];
        if (species != species_pos && species != species_neg) continue;
        Eigen::Vector4d x;
        for (int j = 0; j < 4; ++j) {
            try {
                std::size_t used = 0;
                x[j] = std::stod(fields[j], &used);
                if (used != fields[j].size()) throw std::invalid_argument("trailing junk");
            } catch (const std::exception&) {
                throw ConfigError(path + ": malformed row at line " + std::to_string(line_no));
            }
        }
        rows.push_back(x);
        labels.push_back(species == species_pos ? 1.0 : -1.0);
    }

    const auto count = [&](double v) {
        long n = 0;
        for (double l : labels) n += (l == v);
        return n;
    };
    if (count(1.0) == 0 || count(-1.0) == 0) {
        throw ConfigError(path + ": need rows from both species '" + species_pos + "' and '" +
                          species_neg + "'");
    }

    LabeledDataset data;
    data.name = "iris";
    data.points.resize(static_cast<Eigen::Index>(rows.size()), 4);
    data.labels.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        data.points.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
        data.labels[static_cast<Eigen::Index>(i)] = labels[i];
    }
    return data;
}

void export_csv(const LabeledDataset& data, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write dataset file: " + path);
    for (Eigen::Index j = 0; j < data.dim(); ++j) out << "x" << j << ",";
    out << "label\n";
    char buf[32];
    for (Eigen::Index i = 0; i < data.size(); ++i) {
        for (Eigen::Index j = 0; j < data.dim(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", data.points(i, j));
            out << buf << ",";
        }
        out << static_cast<long>(data.labels[i]) << "\n";
    }
}

}  // namespace qmeta
