#pragma once

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "rtlos/aqt/extrapolate.hpp"
#include "rtlos/aqt/remaining.hpp"
#include "rtlos/error.hpp"
#include "rtlos/phc/config.hpp"
#include "rtlos/phc/types.hpp"

namespace rtlos::aqt {

struct AqtOptions {
  // Subtract the doctor's outpatient throughput up to t2 from the OPD queue.
  bool doctor_completions = true;
  // Cap the NCD outflow by the patients who can actually leave the NCD ahead
  // of this one (queue, server, expected arrivals before t + delta, and self).
  bool cap_ncd_inflow = true;
};

// Facility parameters the predictor reads, all in minutes.
struct AqtParams {
  double lambda_o = 9.0;  // outpatient mean interarrival
  double p_n = 0.5;       // share of outpatients routed via the NCD nurse
  double lambda_ip = 2880.0;
  double lambda_cbp = 2880.0;
  sim::ServiceDistribution ncd = sim::Uniform{2.0, 5.0};
  sim::ServiceDistribution doctor_o = sim::Gaussian{0.87, 0.21};
  sim::ServiceDistribution doctor_ip = sim::Uniform{10.0, 30.0};
  sim::ServiceDistribution doctor_cbp = sim::Uniform{30.0, 60.0};
  sim::ServiceDistribution lab = sim::Gaussian{3.45, 0.83};
  sim::ServiceDistribution pharmacy = sim::Gaussian{2.08, 0.72};

  static AqtParams from(const phc::FacilityConfig& cfg) {
    AqtParams p;
    p.lambda_o = cfg.outpatient_lambda();
    p.p_n = cfg.ncd_age_fraction;
    p.lambda_ip = sim::mean(cfg.inpatient_interarrival);
    p.lambda_cbp = sim::mean(cfg.childbirth_interarrival);
    p.ncd = cfg.ncd_service;
    p.doctor_o = cfg.doctor_outpatient_service;
    p.doctor_ip = cfg.doctor_inpatient_service;
    p.doctor_cbp = cfg.doctor_childbirth_service;
    p.lab = cfg.lab_service;
    p.pharmacy = cfg.pharmacy_service;
    return p;
  }

  const sim::ServiceDistribution& doctor(phc::PatientClass c) const {
    if (c == phc::PatientClass::Inpatient) return doctor_ip;
    if (c == phc::PatientClass::Childbirth) return doctor_cbp;
    return doctor_o;
  }
};

// 1/lambda_h = 1/lambda_ip + 1/lambda_cbp.
inline double net_interarrival(double lambda_ip, double lambda_cbp) {
  return 1.0 / (1.0 / lambda_ip + 1.0 / lambda_cbp);
}

// Mean higher-priority service time weighted by each class's arrival rate.
inline double weighted_priority_service(double mu_ip, double lambda_ip, double mu_cbp, double lambda_cbp) {
  const double r_ip = 1.0 / lambda_ip;
  const double r_cbp = 1.0 / lambda_cbp;
  if (r_ip + r_cbp == 0.0) return 0.0;  // no priority traffic
  return (mu_ip * r_ip + mu_cbp * r_cbp) / (r_ip + r_cbp);
}

// Naive delay inflated by the priority arrivals that keep jumping ahead:
// d + d*mu/lambda + d*(mu/lambda)^2 + ... = d*lambda/(lambda - mu).
inline double geometric_delay(double naive, double lambda_h, double mu_h) {
  if (!(mu_h < lambda_h)) throw StabilityError("priority load mu_h >= lambda_h: geometric delay diverges");
  if (std::isinf(lambda_h)) return naive;
  return naive * lambda_h / (lambda_h - mu_h);
}

inline StationObservation observe_station(const phc::SubsystemState& s, const sim::ServiceDistribution& dist) {
  StationObservation obs;
  obs.queue_len = s.queue_total();
  obs.busy = s.busy();
  obs.remaining.clear();
  // An idle server starts the head of the queue at once: nothing remains.
  for (const auto& server : s.servers)
    obs.remaining.push_back(server.busy ? remaining_service_time(dist, server.elapsed) : 0.0);
  if (obs.remaining.empty()) obs.remaining.push_back(0.0);
  return obs;
}

// NCD nurse at t + delta; the station sees every 1/p_n-th outpatient.
inline ExtrapolatedState predict_los_ncd(const StationObservation& obs, double delta, double lambda_o, double p_n,
                                         const sim::ServiceDistribution& dist) {
  if (!(p_n > 0.0)) return {};
  return extrapolate_mgm(obs, delta, lambda_o / p_n, dist);
}

struct DoctorPrediction {
  double horizon = 0.0;  // delta + L_n
  double arrivals_o = 0.0;
  double arrivals_i = 0.0;
  double arrivals_c = 0.0;
  double ncd_inflow = 0.0;
  double mu_h = 0.0;
  double lambda_h = 0.0;
  double served_h = 0.0;
  double queue_h = 0.0;  // N_h
  double completions_o = 0.0;
  double queue_o = 0.0;  // N_o
  double remaining_t = 0.0;
  double elapsed = 0.0;
  double remaining = 0.0;
  double delay_h = 0.0;
  double delay_o = 0.0;
  double delay_naive = 0.0;
  double delay = 0.0;
  double los = 0.0;
  bool stable = true;
};

inline DoctorPrediction predict_los_doctor(const phc::SubsystemState& doc, const StationObservation& ncd,
                                           double delta, double l_n, bool visited_ncd, const AqtParams& p,
                                           const AqtOptions& opt = {}) {
  DoctorPrediction out;
  const double e_o = sim::mean(p.doctor_o);
  const double e_n = sim::mean(p.ncd);
  if (!visited_ncd) l_n = 0.0;
  const double h = delta + l_n;
  out.horizon = h;
  out.remaining_t = workstation_remaining(doc, [&](phc::PatientClass c) -> const sim::ServiceDistribution& {
    return p.doctor(c);
  });

  const double direct = p.p_n < 1.0 ? h / (p.lambda_o * (1.0 - p.p_n)) : 0.0;
  if (visited_ncd) {
    out.ncd_inflow = services_within(h - ncd.net_remaining(), e_n);
    if (opt.cap_ncd_inflow && p.p_n > 0.0) {
      const double ahead = ncd.queue_len + (ncd.busy ? 1.0 : 0.0) + expected_arrivals(delta, p.lambda_o / p.p_n) + 1.0;
      out.ncd_inflow = std::min(out.ncd_inflow, ahead);
    }
  }
  out.arrivals_o = std::max(direct + out.ncd_inflow - 1.0, 0.0);
  out.arrivals_i = h / p.lambda_ip;
  out.arrivals_c = h / p.lambda_cbp;

  out.mu_h = weighted_priority_service(sim::mean(p.doctor_ip), p.lambda_ip, sim::mean(p.doctor_cbp), p.lambda_cbp);
  out.lambda_h = net_interarrival(p.lambda_ip, p.lambda_cbp);
  const double waiting_h = doc.queue_inpatient + doc.queue_childbirth + out.arrivals_i + out.arrivals_c;
  out.served_h = std::min(waiting_h, services_within(h - out.remaining_t, out.mu_h));
  out.queue_h = waiting_h - out.served_h;

  if (opt.doctor_completions)
    out.completions_o = services_within(h - out.remaining_t - out.served_h * out.mu_h, e_o);
  out.queue_o = std::max(doc.queue_outpatient + out.arrivals_o - out.completions_o, 0.0);

  if (h == 0.0) {
    out.remaining = out.remaining_t;
  } else if (doc.busy() || doc.queue_total() > 0 || out.arrivals_o > 0.0) {
    out.elapsed = elapsed_after(h, out.remaining_t, e_o);
    out.remaining = remaining_service_time(p.doctor_o, out.elapsed);
  }
  out.delay_h = out.queue_h * out.mu_h + out.remaining;
  out.delay_o = out.queue_o * e_o;
  out.delay_naive = out.delay_h + out.delay_o;
  try {
    out.delay = geometric_delay(out.delay_naive, out.lambda_h, out.mu_h);
  } catch (const StabilityError&) {
    out.stable = false;
    out.delay = out.delay_naive;
  }
  out.los = out.delay + e_o;
  return out;
}

// Laboratory at t3 = t + delta + L_n + L_o.
inline ExtrapolatedState predict_los_lab(const StationObservation& obs, double delta, double l_n, double l_o,
                                         double n_t2_o, double e_o, const sim::ServiceDistribution& dist) {
  const double e_l = sim::mean(dist);
  const double h = delta + l_n + l_o;
  const double w_t = obs.net_remaining();
  ExtrapolatedState out;
  out.arrivals = std::min(0.5 * n_t2_o, std::floor(l_o / e_o));
  out.completions = services_within(h - w_t, e_l);
  out.queue_len = std::max(obs.queue_len + out.arrivals - out.completions, 0.0);
  if (obs.busy || obs.queue_len > 0.0 || out.arrivals > 0.0) {
    out.elapsed = elapsed_after(h, w_t, e_l);
    out.remaining = remaining_service_time(dist, out.elapsed);
  }
  out.delay = out.queue_len * e_l + out.remaining;
  out.los = out.delay + e_l;
  return out;
}

// Pharmacy at t4 = t + delta + L_n + L_o + L_l.
inline ExtrapolatedState predict_los_pharmacy(const StationObservation& obs, double delta, double l_n, double l_o,
                                              double l_l, double n_t2_o, double n_t_l, double e_o, double e_l,
                                              const sim::ServiceDistribution& dist) {
  const double e_p = sim::mean(dist);
  const double h = delta + l_n + l_o + l_l;
  const double w_t = obs.net_remaining();
  ExtrapolatedState out;
  out.arrivals = std::min(n_t2_o + n_t_l, std::floor(l_o / e_o) + std::floor(l_l / e_l));
  out.completions = services_within(h - w_t, e_p);
  out.queue_len = std::max(obs.queue_len + out.arrivals - out.completions, 0.0);
  if (obs.busy || obs.queue_len > 0.0 || out.arrivals > 0.0) {
    out.elapsed = elapsed_after(h, w_t, e_p);
    out.remaining = remaining_service_time(dist, out.elapsed);
  }
  out.delay = out.queue_len * e_p + out.remaining;
  out.los = out.delay + e_p;
  return out;
}

struct LosPrediction {
  double ncd = 0.0;
  double doctor = 0.0;
  double lab = 0.0;
  double pharmacy = 0.0;
  double w_ncd = 0.0;
  double w_doctor = 1.0;
  double w_lab = 0.5;
  double w_pharmacy = 1.0;
  double total = 0.0;
};

// Weighted total over the four stations; the NCD term only counts for
// patients routed through it.
inline LosPrediction total_los(bool via_ncd, double l_n, double l_d, double l_l, double l_p, double w_lab = 0.5) {
  LosPrediction out;
  out.w_ncd = via_ncd ? 1.0 : 0.0;
  out.ncd = via_ncd ? l_n : 0.0;
  out.doctor = l_d;
  out.lab = l_l;
  out.pharmacy = l_p;
  out.w_lab = w_lab;
  out.total = out.w_ncd * out.ncd + out.w_doctor * l_d + out.w_lab * l_l + out.w_pharmacy * l_p;
  return out;
}

struct AqtBreakdown {
  double delta = 0.0;
  bool via_ncd = false;
  ExtrapolatedState ncd;
  DoctorPrediction doctor;
  ExtrapolatedState lab;
  ExtrapolatedState pharmacy;
  LosPrediction los;
};

// Full prediction for an outpatient observed at t who reaches the facility at
// t + delta. `w_lab` is the laboratory weight: 0.5 before routing is known, or
// 0/1 when scoring against a realized route.
inline AqtBreakdown predict(const phc::FacilityState& state, const AqtParams& p, double delta, bool via_ncd,
                            double w_lab = 0.5, const AqtOptions& opt = {}) {
  using phc::StationId;
  for (const auto* d : {&p.ncd, &p.doctor_o, &p.doctor_ip, &p.doctor_cbp, &p.lab, &p.pharmacy}) anchors(*d);
  AqtBreakdown out;
  out.delta = delta;
  out.via_ncd = via_ncd;
  const auto obs_n = observe_station(state[StationId::Ncd], p.ncd);
  const auto obs_l = observe_station(state[StationId::Laboratory], p.lab);
  const auto obs_p = observe_station(state[StationId::Pharmacy], p.pharmacy);
  const double e_o = sim::mean(p.doctor_o);
  const double e_l = sim::mean(p.lab);

  out.ncd = predict_los_ncd(obs_n, delta, p.lambda_o, p.p_n, p.ncd);
  const double l_n = via_ncd ? out.ncd.los : 0.0;
  out.doctor = predict_los_doctor(state[StationId::Doctor], obs_n, delta, l_n, via_ncd, p, opt);
  const double l_o = out.doctor.los;
  out.lab = predict_los_lab(obs_l, delta, l_n, l_o, out.doctor.queue_o, e_o, p.lab);
  out.pharmacy = predict_los_pharmacy(obs_p, delta, l_n, l_o, w_lab * out.lab.los, out.doctor.queue_o,
                                      obs_l.queue_len, e_o, e_l, p.pharmacy);
  out.los = total_los(via_ncd, out.ncd.los, l_o, out.lab.los, out.pharmacy.los, w_lab);
  return out;
}

inline AqtBreakdown predict(const phc::FacilityState& state, const phc::FacilityConfig& cfg, double delta,
                            bool via_ncd, double w_lab = 0.5, const AqtOptions& opt = {}) {
  return predict(state, AqtParams::from(cfg), delta, via_ncd, w_lab, opt);
}

inline void write_debug_header(std::ostream& out) {
  out << "delta,via_ncd,A_n,N_n,Lq_n,x_n,w_n,D_n,L_n,H_d,A_o,A_i,A_c,ncd_inflow,mu_h,lambda_h,served_h,N_h,"
         "completions_o,N_o,w_t_d,x_d,w_d,d_h,d_o,d_naive,d_d,L_d,stable,A_l,N_l,Lq_l,x_l,w_l,D_l,L_l,A_p,N_p,"
         "Lq_p,x_p,w_p,D_p,L_p,weight_lab,total\n";
}

inline void write_debug_row(std::ostream& out, const AqtBreakdown& b) {
  auto station = [&out](const ExtrapolatedState& s) {
    out << s.arrivals << ',' << s.completions << ',' << s.queue_len << ',' << s.elapsed << ',' << s.remaining << ','
        << s.delay << ',' << s.los << ',';
  };
  out << b.delta << ',' << (b.via_ncd ? 1 : 0) << ',';
  station(b.ncd);
  const auto& d = b.doctor;
  out << d.horizon << ',' << d.arrivals_o << ',' << d.arrivals_i << ',' << d.arrivals_c << ',' << d.ncd_inflow << ','
      << d.mu_h << ',' << d.lambda_h << ',' << d.served_h << ',' << d.queue_h << ',' << d.completions_o << ','
      << d.queue_o << ',' << d.remaining_t << ',' << d.elapsed << ',' << d.remaining << ',' << d.delay_h << ','
      << d.delay_o << ',' << d.delay_naive << ',' << d.delay << ',' << d.los << ',' << (d.stable ? 1 : 0) << ',';
  station(b.lab);
  station(b.pharmacy);
  out << b.los.w_lab << ',' << b.los.total << '\n';
}

}  // namespace rtlos::aqt
