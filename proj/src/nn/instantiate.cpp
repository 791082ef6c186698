// Compiles the layer templates once for both storage precisions.
#include "keyscope/nn/activation.hpp"
#include "keyscope/nn/batchnorm.hpp"
#include "keyscope/nn/conv2d.hpp"
#include "keyscope/nn/dense.hpp"
#include "keyscope/nn/dropout.hpp"
#include "keyscope/nn/pooling.hpp"
#include "keyscope/nn/sgd.hpp"

namespace keyscope::nn {

template class Conv2d<float>;
template class Conv2d<double>;
template class BatchNorm2d<float>;
template class BatchNorm2d<double>;
template class Elu<float>;
template class Elu<double>;
template class MaxPool2x2<float>;
template class MaxPool2x2<double>;
template class GlobalAvgPool<float>;
template class GlobalAvgPool<double>;
template class TimeAvgPool<float>;
template class TimeAvgPool<double>;
template class Dense<float>;
template class Dense<double>;
template class SpatialDropout<float>;
template class SpatialDropout<double>;
template class Sgd<float>;
template class Sgd<double>;

}  // namespace keyscope::nn
