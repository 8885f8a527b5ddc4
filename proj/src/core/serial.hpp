#pragma once
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "core/bounds.hpp"
#include "core/montecarlo.hpp"
#include "core/nets.hpp"

namespace bell::serial {

// All emitters write doubles with 17 significant digits and keep key order
// fixed, so equal inputs give byte-equal output.
std::string format_double(double x);
std::string escape_json(std::string_view s);

// {scenario:{N,m,v}, entries:[{a,x,value}...]} with zero coefficients
// omitted; caps, bounds, flags and transform provenance follow when set.
std::string functional_to_json(const BellFunctional& T);
BellFunctional functional_from_json(const std::string& text);

// Same entry layout, but every probability must be present.
std::string behaviour_to_json(const Behaviour& p);
Behaviour behaviour_from_json(const std::string& text);

std::string state_to_json(const quantum::PureState& psi,
                          std::optional<std::uint64_t> seed = {});
quantum::PureState state_from_json(const std::string& text);

// Matrices as flat row-major [re,im] pair lists.
std::string assemblage_to_json(const quantum::Assemblage& A,
                               std::optional<std::uint64_t> seed = {});
quantum::Assemblage assemblage_from_json(const std::string& text);

std::string net_to_json(const nets::HypercubeNet& net);
nets::HypercubeNet net_from_json(const std::string& text);

// One-line records for JSON-lines logs.
std::string bound_record(const bounds::TailBoundResult& r);
std::string tail_sample_record(const mc::SampleOutcome& s);
std::string tail_summary_record(const mc::TailEstimate& t);
std::string concentration_record(const mc::ConcentrationRecord& r);

// eps,empirical,levy_log rows for plotting.
std::string concentration_curve_csv(const mc::ConcentrationRecord& r);

// Flat key=value lines ('#' comments) or a JSON object of scalars.
std::map<std::string, std::string> parse_config(const std::string& text);

} // namespace bell::serial
