#include "stockcnn/nn/tensor.hpp"

namespace stockcnn::nn {

std::string shape_string(const Shape& shape)
{
    std::string out = "(";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(shape[i]);
    }
    out += ')';
    return out;
}

} // namespace stockcnn::nn
