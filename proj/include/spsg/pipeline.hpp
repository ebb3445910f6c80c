#pragma once

#include <string>
#include <vector>

#include "spsg/config.hpp"
#include "spsg/features.hpp"
#include "spsg/image.hpp"
#include "spsg/model.hpp"
#include "spsg/segment.hpp"
#include "spsg/solver.hpp"
#include "spsg/superpixels.hpp"

namespace spsg {

/// Wall-clock seconds per stage.
struct StageTimes {
  double features = 0.0;
  double superpixels = 0.0;
  double dictionary = 0.0;
  double solver = 0.0;
};

struct PreparedImage {
  ColorImage rgb;
  SuperpixelMap map;
  AdjacencyGraph graph;
  Matrix features;  // d x n superpixel means
  Dictionary dictionary;
  ModelInstance instance;
  StageTimes times;
};

LshParams lsh_params(const RunConfig& config);
SolverParams solver_params(const RunConfig& config);

/// Pixel features, honouring the feature cache when one is configured.
PixelFeatureField pixel_features(const ColorImage& rgb, const RunConfig& config);
SuperpixelMap superpixels_for(const ColorImage& rgb, const RunConfig& config);

/// Features, superpixels, dictionary and model for the configured image.
PreparedImage prepare(const RunConfig& config);

struct RunResult {
  LambdaMax lambda_max;
  SegmentationFamily family;
  std::vector<SweepTraceRow> trace;
  StageTimes times;
};

RunResult run_segmentation(const PreparedImage& prepared, const RunConfig& config);

/// Label PNG per alpha, index.json, config.txt and the optional trace CSV.
void write_outputs(const RunConfig& config, const RunResult& result);

std::string alpha_file_name(double alpha);

}  // namespace spsg
