#include "plopt/implicit.hpp"

#include "plopt/errors.hpp"

namespace plopt {

std::size_t bit_width_for(unsigned long N) {
  std::size_t n = 0;
  while (N > 0) N >>= 1, ++n;
  return n == 0 ? 1 : n;
}

std::size_t ImplicitSpec::bit_width() const { return bit_width_for(N); }

void ImplicitSpec::validate() const {
  if (N < 1) throw ContractError("implicit spec: N must be >= 1");
  C.check_well_formed();
  const std::size_t n = bit_width();
  if (C.n_inputs != n || C.n_outputs() != n)
    throw ContractError("implicit spec: circuit width must be floor(log2 N)+1 = " +
                        std::to_string(n));
}

std::vector<GateRef> emit_bitextract(CircuitBuilder& b, GateRef x, GateRef y, std::size_t n,
                                     const GammaOptions& options) {
  if (n == 0) throw ContractError("bitextract needs n >= 1");
  std::vector<GateRef> bits;
  GateRef cur = x;
  for (std::size_t i = n; i-- > 0;) {
    const Rational pow2(mpz_class(1) << i);
    GateRef scaled_y = i == 0 ? y : b.scale(pow2, y);
    GateRef bit = b.heaviside_of(b.sub(cur, scaled_y));
    bits.push_back(bit);
    if (i > 0) {
      // cur -= bitmult(2^i y, bit) = H(bit - 1/2) * (2^i y)
      GateRef cond = b.sub(bit, b.constant(Rational(1, 2)));
      GateRef sub_term = emit_h_times(b, cond, scaled_y, options);
      cur = b.sub(cur, sub_term);
    }
  }
  return bits;  // b_{n-1} first
}

GateRef emit_bitmult_word(CircuitBuilder& b, GateRef a, const std::vector<GateRef>& bits,
                          const GammaOptions& options) {
  if (bits.empty()) throw ContractError("bitmult needs at least one bit");
  const std::size_t n = bits.size();
  std::vector<Rational> coeffs;
  std::vector<GateRef> refs;
  for (std::size_t j = 0; j < n; ++j) {
    // bits are MSB first: bit j has weight 2^(n-1-j)
    GateRef cond = b.sub(bits[j], b.constant(Rational(1, 2)));
    GateRef term = emit_h_times(b, cond, a, options);
    coeffs.emplace_back(mpz_class(1) << (n - 1 - j));
    refs.push_back(term);
  }
  return b.affine(Rational(0), coeffs, refs);
}

GateRef emit_triangle_wave(CircuitBuilder& b, GateRef x, GateRef p, std::size_t n) {
  GateRef cur = x;
  for (std::size_t k = n; k >= 1; --k) {
    // T_k(x,p) = T_{k-1}(min(x, (2^k + 1/2) p - x), p)
    const Rational periods = Rational(mpz_class(1) << k) + Rational(1, 2);
    GateRef reflect = b.sub(b.scale(periods, p), cur);
    cur = b.min(cur, reflect);
  }
  // T_0(x,p) = max(min(x, p/2 - x), min(x - p, 3p/2 - x))
  GateRef left = b.min(cur, b.sub(b.scale(Rational(1, 2), p), cur));
  GateRef right = b.min(b.sub(cur, p), b.sub(b.scale(Rational(3, 2), p), cur));
  return b.max(left, right);
}

Circuit bitmult_n(std::size_t n, const Rational& a_bound, const GammaOptions& options) {
  if (n == 0) throw ContractError("bitmult needs n >= 1");
  CircuitBuilder b;
  GateRef a = b.input(Interval(-a_bound, a_bound));
  std::vector<GateRef> bits;
  for (std::size_t j = 0; j < n; ++j) bits.push_back(b.input(Interval(Rational(0), Rational(1))));
  b.mark_primary_output(emit_bitmult_word(b, a, bits, options));
  return b.finish();
}

Circuit bitextract_n(std::size_t n, const GammaOptions& options) {
  if (n == 0) throw ContractError("bitextract needs n >= 1");
  CircuitBuilder b;
  const Rational xb = Rational(mpz_class(1) << n) + 1;
  GateRef x = b.input(Interval(-xb, xb));
  GateRef y = b.input(Interval(Rational(0), Rational(1)));
  for (GateRef bit : emit_bitextract(b, x, y, n, options)) b.mark_primary_output(bit);
  return b.finish();
}

Circuit square_wave(std::size_t n) {
  CircuitBuilder b;
  const Rational xb = (Rational(mpz_class(1) << n) + 1) * 2;
  GateRef x = b.input(Interval(-xb, xb));
  GateRef p = b.input(Interval(Rational(0), Rational(2)));
  GateRef t = emit_triangle_wave(b, x, p, n);
  b.mark_primary_output(b.heaviside_of(t));
  return b.finish();
}

namespace {

// bitval of an MSB-first bit vector as an affine gate.
GateRef emit_bitval(CircuitBuilder& b, const std::vector<GateRef>& bits) {
  std::vector<Rational> coeffs;
  for (std::size_t j = 0; j < bits.size(); ++j)
    coeffs.emplace_back(mpz_class(1) << (bits.size() - 1 - j));
  return b.affine(Rational(0), coeffs, bits);
}

}  // namespace

Circuit implicit_pl_function(const ImplicitSpec& spec, const GammaOptions& options) {
  spec.validate();
  const std::size_t n = spec.bit_width();
  const Rational N(static_cast<unsigned long>(spec.N));
  Circuit word = bool_to_pl(clamp_outputs_to(spec.C, spec.N));

  CircuitBuilder b;
  GateRef x = b.input(Interval(-N - 2, N + 2));
  GateRef one = b.constant(Rational(1));
  GateRef xp = b.max(b.constant(Rational(0)), b.min(b.constant(N), x));
  GateRef d1 = b.heaviside_of(b.sub(xp, b.constant(N - Rational(1, 4))));
  GateRef d2 = b.heaviside_of(b.sub(b.constant(Rational(1, 4)), xp));

  auto plus_const = [&](GateRef r, const Rational& q) { return b.add(r, b.constant(q)); };
  GateRef w1 = plus_const(xp, Rational(1, 4));
  GateRef w1p = b.sub(w1, d1);
  GateRef w2p = b.sub(plus_const(xp, Rational(5, 4)), d1);
  std::vector<GateRef> b1 = emit_bitextract(b, w1, one, n, options);
  std::vector<GateRef> b1p = emit_bitextract(b, w1p, one, n, options);
  std::vector<GateRef> b2p = emit_bitextract(b, w2p, one, n, options);
  std::vector<GateRef> f_b1 = b.splice(word, b1);
  std::vector<GateRef> f_b2p = b.splice(word, b2p);
  GateRef g1 = b.add(emit_bitmult_word(b, b.sub(emit_bitval(b, b2p), xp), f_b1, options),
                     emit_bitmult_word(b, b.sub(xp, emit_bitval(b, b1p)), f_b2p, options));

  GateRef w4 = plus_const(xp, Rational(3, 4));
  GateRef w3p = b.add(b.sub(xp, b.constant(Rational(1, 4))), d2);
  GateRef w4p = b.add(plus_const(xp, Rational(3, 4)), d2);
  std::vector<GateRef> b4 = emit_bitextract(b, w4, one, n, options);
  std::vector<GateRef> b3p = emit_bitextract(b, w3p, one, n, options);
  std::vector<GateRef> b4p = emit_bitextract(b, w4p, one, n, options);
  std::vector<GateRef> f_b3p = b.splice(word, b3p);
  std::vector<GateRef> f_b4 = b.splice(word, b4);
  GateRef g2 = b.add(emit_bitmult_word(b, b.sub(emit_bitval(b, b4p), xp), f_b3p, options),
                     emit_bitmult_word(b, b.sub(xp, emit_bitval(b, b3p)), f_b4, options));

  GateRef t = emit_triangle_wave(b, xp, one, n);
  GateRef blend = emit_h_times(b, t, b.sub(g1, g2), options);
  b.mark_primary_output(b.add(g2, blend));
  return b.finish();
}

Circuit implicit_pc_correspondence(const ImplicitSpec& spec, const Rational& z_bound,
                                   const GammaOptions& options) {
  spec.validate();
  if (z_bound <= 0) throw ContractError("z bound must be positive");
  const std::size_t n = spec.bit_width();
  const Rational N(static_cast<unsigned long>(spec.N));
  Circuit word = bool_to_pl(clamp_outputs_to(spec.C, spec.N));

  CircuitBuilder b;
  GateRef x = b.input(Interval(-N - 2, N + 2));
  GateRef y = b.input(Interval(Rational(0), Rational(1)));
  GateRef z = b.input(Interval(-z_bound, z_bound));
  // Clamp into the square wave's first case strictly above N rather than to
  // yN itself: at x' = yN the phase is free and the output could fall
  // anywhere in [f(N-1), f(N)], but for x/y > N the correspondence is the
  // single value f(N).
  GateRef xp = b.max(b.constant(Rational(0)), b.min(b.scale(N + Rational(3, 8), y), x));
  GateRef delta = emit_h_times(b, b.sub(b.scale(Rational(1, 4), y), xp), y, options);

  GateRef w1 = b.add(xp, b.scale(Rational(1, 4), y));
  std::vector<GateRef> b1 = emit_bitextract(b, w1, y, n, options);
  GateRef g1 = emit_bitmult_word(b, z, b.splice(word, b1), options);

  GateRef w2p = b.add(b.sub(xp, b.scale(Rational(1, 4), y)), delta);
  std::vector<GateRef> b2p = emit_bitextract(b, w2p, y, n, options);
  GateRef g2 = emit_bitmult_word(b, z, b.splice(word, b2p), options);

  GateRef t = emit_triangle_wave(b, xp, y, n);
  GateRef blend = emit_h_times(b, t, b.sub(g1, g2), options);
  b.mark_primary_output(b.add(g2, blend));
  return b.finish();
}

}  // namespace plopt
