use std::fmt::Write;

use crate::protocols::{ClosedForm, ProtocolKind};

fn steps(kind: ProtocolKind) -> &'static [&'static str] {
    match kind {
        ProtocolKind::TwoQubit => &[
            "I.   rho0: Alice holds a and c, Bob holds b; the three-qubit state is separable",
            "II.  rho1 = C_ac rho0: Alice applies CNOT with control a, target c",
            "III. rho1' = E_c(rho1): Alice sends c to Bob through the noisy channel E",
            "IV.  rho2' = C_bc rho1': Bob applies CNOT with control b, target c",
            "V.   Bob measures c in the computational basis; outcome 0 leaves a|b entangled \
             (probabilistic), or Bob applies his local map on (b, c) and traces out c (deterministic)",
        ],
        ProtocolKind::Ghz => &[
            "I.   sigma0: register (a, b, c, d1, d2); ancillas d1, d2 separable from a, b, c",
            "II.  sigma1 = C_{a,d2} C_{a,d1} sigma0: Alice entangles a with both ancillas",
            "III. sigma1' = (E1 x E2) sigma1: d1 is sent to Bob, d2 to Charlie",
            "IV.  sigma2' = C_{c,d2} C_{b,d1} sigma1': Bob and Charlie apply CNOTs onto their ancilla",
            "V.   joint computational-basis measurement of (d1, d2)",
        ],
        ProtocolKind::Qudit => &[
            "I.   omega0: qudits a, b, c of dimension d; c separable from a and b",
            "II.  omega1 = C_ac omega0: Alice applies the generalized CNOT |i,j> -> |i, i+j mod d>",
            "III. omega1' = E_c(omega1): c is sent through the noisy channel",
            "IV.  omega2' = C^-1_bc omega1': Bob applies the inverse CNOT |i,j> -> |i, j-i mod d>",
            "V.   Bob measures c in the computational basis",
        ],
    }
}

fn outcomes(kind: ProtocolKind) -> &'static str {
    match kind {
        ProtocolKind::TwoQubit => "2 outcomes: c = 0 (success branch), c = 1",
        ProtocolKind::Ghz => "4 outcomes: (d1, d2) = 00 (success branch), 01, 10, 11",
        ProtocolKind::Qudit => "d outcomes: c = 0 (success branch), 1, ..., d-1",
    }
}

fn partitions(kind: ProtocolKind) -> &'static [&'static str] {
    match kind {
        ProtocolKind::TwoQubit => &[
            "a|bc at rho1' and rho2', b|ac at rho2'",
            "c|ab at every step (separability audit)",
            "a|b averaged over measurement branches and in the success branch",
            "deterministic mode: a|b negativity and concurrence of Bob's output",
        ],
        ProtocolKind::Ghz => &[
            "a|bcD at sigma1' and sigma2', b|acD and c|abD at sigma2' (D = d1 d2)",
            "D|abc at every step (separability audit)",
            "a|bc, b|ac, c|ab averaged over branches and in the success branch",
            "pairwise a|b, b|c, a|c of the success branch",
        ],
        ProtocolKind::Qudit => &[
            "a|bc at omega1' and omega2', b|ac at omega1' and omega2'",
            "c|ab at every step (separability audit)",
            "a|b averaged over measurement branches and in the success branch",
        ],
    }
}

/// Step sequence, measurement outcomes, reported partitions and closed-form
/// ids of `kind`.
pub fn describe(kind: ProtocolKind) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "protocol {kind}");
    let _ = writeln!(s, "steps:");
    for step in steps(kind) {
        let _ = writeln!(s, "  {step}");
    }
    let _ = writeln!(s, "measurement: {}", outcomes(kind));
    let _ = writeln!(s, "partitions:");
    for p in partitions(kind) {
        let _ = writeln!(s, "  {p}");
    }
    let _ = writeln!(s, "closed forms:");
    for f in ClosedForm::ALL.iter().filter(|f| f.protocol() == kind) {
        let _ = writeln!(s, "  {f}");
    }
    s
}
