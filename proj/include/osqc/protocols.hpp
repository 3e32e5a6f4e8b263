#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "osqc/attacks.hpp"
#include "osqc/qstate.hpp"

// Executable state machines for the orthogonal-state protocols: the
// wave-packet protocol GV, the two-way pair protocols PP and CL, the one-way
// dense-coding protocol DLL, and their single-basis variants PP_GV, CL_GV and
// DLL_GV that replace conjugate-coding checks with reordering plus Bell-basis
// verification.

namespace osqc {

enum class ProtocolId { kGv, kPp, kCl, kDll, kPpGv, kClGv, kDllGv };

const char* to_string(ProtocolId id);
ProtocolId protocol_from_string(const std::string& s);
bool is_gv_variant(ProtocolId id);    // PP_GV, CL_GV, DLL_GV
bool is_dense_coding(ProtocolId id);  // 2 bits per pair: CL, DLL and GV variants
int bits_per_use(ProtocolId id);

struct Thresholds {
  double bb84 = 0.11;   // conjugate-coding subroutine abort threshold
  double bell = 0.267;  // Bell-check abort threshold (tolerable error rate)
};

struct ProtocolConfig {
  ProtocolId id = ProtocolId::kPpGv;
  int n = 8;                       // Bell pairs (or GV rounds)
  std::uint64_t seed = 0;
  bool qsdc_mode = false;          // reporting flag: message vs key
  double disclose_fraction = 0.5;  // GV test 2 sample fraction
  Thresholds thresholds;
  std::optional<AttackParams> attack;
  std::vector<int> bits;           // message/key bits; generated from seed if empty

  void validate() const;
  int message_bit_count() const;
};

struct Event {
  enum class Kind {
    kQuantumSend,
    kAck,
    kAnnounce,
    kMeasurement,
    kEncode,
    kAbort,
  };
  Kind kind;
  std::string label;           // e.g. "bell", "mub_z", "pair-coordinates"
  std::vector<int> particles;
  std::vector<int> values;
  int time_slot = -1;
};

const char* to_string(Event::Kind k);

// Integer-slot timing record for one GV round. Honest rounds satisfy
// t_r = t_s + travel + delay exactly.
struct GvTiming {
  int send_slot = 0;
  int receive_slot = 0;
  int delay = 0;
  int travel = 0;
  bool consistent() const { return receive_slot == send_slot + travel + delay; }
};

struct ProtocolTranscript {
  ProtocolId protocol;
  std::uint64_t seed = 0;
  bool qsdc_mode = false;
  std::vector<Event> events;
  std::map<std::string, double> error_rates;
  std::vector<int> sent_bits;
  std::vector<int> decoded_bits;
  std::vector<int> eve_decoded_bits;  // timing hold-both scenario only
  bool aborted = false;
  std::string abort_reason;

  // Counting fields checked by the protocol invariants.
  int transmitted_leg1 = 0;
  int transmitted_leg2 = 0;
  int retained = 0;
  int checked = 0;
  int encoded_pairs = 0;
  std::vector<GvTiming> timings;
  std::map<std::string, int> basis_counts;  // measurement label -> count

  std::vector<int> attacked_particles;
};

ProtocolTranscript run_protocol(const ProtocolConfig& config);

// Individual runners (dispatched by run_protocol).
ProtocolTranscript run_gv(const ProtocolConfig& config);
ProtocolTranscript run_pp_family(const ProtocolConfig& config);     // PP, CL
ProtocolTranscript run_pp_gv_family(const ProtocolConfig& config);  // PP_GV, CL_GV
ProtocolTranscript run_dll_family(const ProtocolConfig& config);    // DLL, DLL_GV

// ---------------------------------------------------------------------------
// Particle store
// ---------------------------------------------------------------------------

// Holds the joint quantum state of all live particles, grouped into small
// registers. Cross-register Bell measurements merge registers (at most 4
// qubits at once) and measured qubits are factored back out, so entanglement
// swapping chains of any length stay within the register limit.
class ParticleStore {
 public:
  // Adds a register in the given state; returns the ids of its qubits in order.
  std::vector<int> add(StateVector<double> state);

  // Pair in |Psi+>; returns {id_first, id_second}.
  std::pair<int, int> add_pair();

  void apply_1q(int pid, const CMat<double>& u);
  int apply_channel_sampled(int pid, const std::vector<CMat<double>>& kraus,
                            Rng& rng);

  // basis: 0 = {0,1}, 1 = {+,-}. Returns the outcome bit.
  int measure_pauli(int pid, int basis, Rng& rng);

  // Bell measurement of two particles; returns states::BellIndex.
  int measure_bell(int pid_a, int pid_b, Rng& rng);

  const StateVector<double>& state_of(int pid) const;
  std::vector<int> register_members(int pid) const;

 private:
  struct Slot {
    int reg = -1;
    int pos = -1;
  };
  int merge(int reg_a, int reg_b);
  void factor_out(int reg, const std::vector<int>& positions,
                  const StateVector<double>& known_factor);

  std::vector<std::optional<StateVector<double>>> registers_;
  std::vector<std::vector<int>> members_;
  std::vector<Slot> slots_;
};

// ---------------------------------------------------------------------------
// Verification subroutines
// ---------------------------------------------------------------------------

// Conjugate-coding check: each pair (a, b) is measured in a uniformly random
// common basis from {0,1} / {+,-}; in |Psi+> outcomes anticorrelate in Z and
// correlate in X. Returns the mismatch fraction.
double verification_bb84(ParticleStore& store,
                         const std::vector<std::pair<int, int>>& pairs,
                         Rng& rng, ProtocolTranscript* transcript);

// Bell-basis check: fraction of pairs not found in |Psi+>.
double verification_bell(ParticleStore& store,
                         const std::vector<std::pair<int, int>>& pairs,
                         Rng& rng, ProtocolTranscript* transcript);

// ---------------------------------------------------------------------------
// Scenario attacks (protocol-level)
// ---------------------------------------------------------------------------

// Pairing-guess scenario at two shuffled Bell pairs: Eve guesses one of the
// three pairings of the four transmitted particles, Bell-measures her guess,
// resends, and the true pairs are then checked against |Psi+>.
struct PairingGuessStats {
  double p_guess_correct;       // exact: 1/3
  double p_detect_given_wrong;  // exact: 3/4
  double p_detect_overall;      // exact: 1/2
};

// Exact values by exhaustive enumeration over pairings and Bell outcomes.
PairingGuessStats pairing_guess_enumerate();

// Monte Carlo estimate of the same scenario.
PairingGuessStats pairing_guess_simulate(int trials, Rng& rng);

// Scripted GV timing scenario: Alice draws a random send-slot jitter per
// round; Eve inserts dummies on a fixed schedule. Returns the detection
// probability (timing test failure in at least one round), computed either
// by exhaustive enumeration over jitter patterns or by simulation.
double timing_jitter_detection_enumerate(int rounds, int jitter_range);
double timing_jitter_detection_simulate(int rounds, int jitter_range,
                                        int trials, Rng& rng);

}  // namespace osqc
