#include <cstddef>
#include <stdexcept>
#include <vector>

class Matrix {
public:
    Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

    double& at(std::size_t r, std::size_t c) {
        if (r >= rows_ || c >= cols_)
            throw std::out_of_range("matrix index");
        return data_[r * cols_ + c];
    }

    double sum() const {
        double total = 0;
        for (double v : data_)
            total += v;
        return total;
    }

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> data_;
};
