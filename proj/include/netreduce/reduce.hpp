#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "netreduce/json_io.hpp"
#include "netreduce/network.hpp"
#include "netreduce/timeseries.hpp"

namespace netreduce {

using IndexSet = std::vector<std::size_t>;

/**
 * Index bookkeeping between a full network and a reduced one. All lists are
 * ascending. (gamma, gamma_comp1, gamma_comp2) partition the parameters into
 * fitted, frozen-at-nominal and dropped; (pi, pi_comp1, pi_comp2) partition the
 * species into kept, frozen-at-time-average and dropped.
 */
struct ReductionMaps {
  IndexSet P;
  IndexSet J_P;
  IndexSet S_P;
  IndexSet gamma;
  IndexSet gamma_comp1;
  IndexSet gamma_comp2;
  IndexSet pi;
  IndexSet pi_comp1;
  IndexSet pi_comp2;
  Vector y_bar;              // values of pi_comp1 species
  Vector u;                  // values of gamma_comp1 parameters
  Vector full_time_average;  // time average of every full-model species in the source data
  std::string data_source;   // where the time average came from

  std::size_t num_species() const { return S_P.size(); }
  std::size_t num_reactions() const { return J_P.size(); }
  std::size_t num_parameters() const { return P.size(); }

  /// x_bar = Pi x.
  Vector project_state(ConstVectorRef x) const;
  /// theta = Gamma c.
  Vector project_parameters(ConstVectorRef c) const;
};

struct ReducedModel {
  ReductionMaps maps;
  Network network;  // species S_P, parameters P at theta0, reactions J_P with frozen constants substituted

  Vector theta0() const { return network.parameter_values(); }
};

/// Union of the reactions that reference any parameter in P.
IndexSet select_reactions(const Network& net, const IndexSet& P);

/// Species with a positive reactant or product coefficient in some selected reaction.
IndexSet select_species(const Network& net, const IndexSet& J_P);

ReductionMaps build_maps(const Network& net, const IndexSet& P, const IndexSet& J_P, const IndexSet& S_P,
                         const TimeSeries& ts);

/// Same, from a precomputed full-model time average.
ReductionMaps build_maps(const Network& net, const IndexSet& P, const IndexSet& J_P, const IndexSet& S_P,
                         const Vector& full_time_average, std::string data_source = {});

ReducedModel build_reduced_model(const Network& net, const ReductionMaps& maps);

/// Convenience: select reactions and species for P and build the maps and model.
ReducedModel reduce(const Network& net, const IndexSet& P, const TimeSeries& ts);

/// Adds every reaction in which the (kept) species i takes part; P is unchanged.
ReductionMaps augment_with_species(const Network& net, const ReductionMaps& maps, std::size_t species);

Json maps_to_json(const Network& full, const ReductionMaps& maps);
ReductionMaps maps_from_json(const Json& doc);

Json reduced_to_json(const Network& full, const ReducedModel& model);
ReducedModel reduced_from_json(const Json& doc);
ReducedModel load_reduced(const std::string& path);

}  // namespace netreduce
