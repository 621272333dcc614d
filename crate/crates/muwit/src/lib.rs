//! Witnesses for non-mixed-unitary quantum channels.
//!
//! A unital channel is *mixed-unitary* (MU) when it can be written as a
//! probabilistic mixture of unitary conjugations. Deciding this is NP-hard
//! in general; this crate implements one-sided semidefinite witnesses that
//! certify the *absence* of such a representation, together with the
//! supporting machinery:
//!
//! * [`qmat`] — dense complex matrices and multipartite operator algebra,
//! * [`channels`] — Kraus/Choi channel representations and a zoo of unital
//!   qutrit channels,
//! * [`conic`] — a solver-agnostic SDP problem model with a first-order
//!   operator-splitting solver and an independent feasibility audit,
//! * [`witness`] — the quantum-memory witness, the Mendl–Wolf witness, the
//!   relaxed witnesses, constructive MU certificates, and family scans,
//! * [`dynamics`] — a three-qubit dephasing model whose reduced two-qubit
//!   channel is fed to the witnesses as a function of time.

pub mod channels;
pub mod conic;
pub mod dynamics;
pub mod qmat;
pub mod witness;
