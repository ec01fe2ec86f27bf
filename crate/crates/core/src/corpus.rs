//! Built-in protocol models (BAC and Feldhofer in four styles, with silent
//! and error-message variants) and the attack-formula library.
//!
//! Each model is kept as source text in the process grammar and parsed on
//! demand, so `show` prints exactly what is built.

use std::fmt;

use thiserror::Error;

use crate::logic::{instantiate_free, parse_formula, Dialect, Formula};
use crate::procs::{parse_process, ExtendedProcess};
use crate::terms::Ident;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Protocol {
    Bac,
    Feldhofer,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Style {
    Min,
    Get,
    Ch,
    Two,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Variant {
    Silent,
    Error,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Side {
    System,
    Spec,
}

/// Identifies one model of the corpus, e.g. `bac-get-system` or
/// `feldhofer-min-error-spec`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct ModelId {
    pub protocol: Protocol,
    pub style: Style,
    pub variant: Variant,
    pub side: Side,
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let proto = match self.protocol {
            Protocol::Bac => "bac",
            Protocol::Feldhofer => "feldhofer",
        };
        let style = match self.style {
            Style::Min => "min",
            Style::Get => "get",
            Style::Ch => "ch",
            Style::Two => "two",
        };
        let side = match self.side {
            Side::System => "system",
            Side::Spec => "spec",
        };
        match self.variant {
            Variant::Silent => write!(f, "{proto}-{style}-{side}"),
            Variant::Error => write!(f, "{proto}-{style}-error-{side}"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CorpusError {
    #[error("unknown model id '{0}'")]
    UnknownModel(String),
    #[error("unknown attack id '{0}'")]
    UnknownAttack(String),
    #[error("invalid combination: the error variant is only defined for Feldhofer")]
    InvalidCombination,
}

impl ModelId {
    pub fn parse(s: &str) -> Result<ModelId, CorpusError> {
        let parts: Vec<&str> = s.split('-').collect();
        let err = || CorpusError::UnknownModel(s.to_string());
        let (proto, style, variant, side) = match parts.as_slice() {
            [p, st, sd] => (*p, *st, Variant::Silent, *sd),
            [p, st, "error", sd] => (*p, *st, Variant::Error, *sd),
            _ => return Err(err()),
        };
        let protocol = match proto {
            "bac" => Protocol::Bac,
            "feldhofer" => Protocol::Feldhofer,
            _ => return Err(err()),
        };
        let style = match style {
            "min" => Style::Min,
            "get" => Style::Get,
            "ch" => Style::Ch,
            "two" => Style::Two,
            _ => return Err(err()),
        };
        let side = match side {
            "system" => Side::System,
            "spec" => Side::Spec,
            _ => return Err(err()),
        };
        let id = ModelId {
            protocol,
            style,
            variant,
            side,
        };
        id.validate()?;
        Ok(id)
    }

    fn validate(&self) -> Result<(), CorpusError> {
        if self.variant == Variant::Error && self.protocol == Protocol::Bac {
            return Err(CorpusError::InvalidCombination);
        }
        Ok(())
    }
}

/// All valid model identifiers.
pub fn all_model_ids() -> Vec<ModelId> {
    let mut out = Vec::new();
    for protocol in [Protocol::Bac, Protocol::Feldhofer] {
        for style in [Style::Min, Style::Get, Style::Ch, Style::Two] {
            for variant in [Variant::Silent, Variant::Error] {
                for side in [Side::System, Side::Spec] {
                    let id = ModelId {
                        protocol,
                        style,
                        variant,
                        side,
                    };
                    if id.validate().is_ok() {
                        out.push(id);
                    }
                }
            }
        }
    }
    out
}

const BAC_DEFS: &str = "\
# BAC reader: receive a challenge, respond with an encrypted nonce pair
# and a MAC over the ciphertext.
def V(c,d,ke,km) =
  in(d,nt). new nr,kr.
  let m = enc(pair(nr,pair(nt,kr)),ke) in
  out(c, pair(m, mac(m,km)))

# BAC ePassport: send a nonce challenge, check the MAC and the echoed
# nonce, then respond in kind. A malformed response blocks silently.
def P(c,d,ke,km) =
  new nt. out(c,nt). in(d,y).
  [snd(y) = mac(fst(y),km)]
  [nt = fst(snd(dec(fst(y),ke)))]
  new kt.
  let m = enc(pair(nt,pair(fst(dec(fst(y),ke)),kt)),ke) in
  out(c, pair(m, mac(m,km)))
";

const FELDHOFER_DEFS: &str = "\
# Feldhofer reader: receive a challenge, respond with an encrypted pair.
def V(c,d,k) =
  in(d,nt). new nr.
  out(c, enc(pair(nr,nt),k))

# Feldhofer tag, failing silently on a malformed response.
def P(c,d,k) =
  new nt. out(c,nt). in(d,y).
  [nt = snd(dec(y,k))]
  out(c, enc(pair(nt,fst(dec(y,k))),k))

# Feldhofer tag announcing authentication failure with a cleartext error.
def Perr(c,d,k) =
  new nt. out(c,nt). in(d,y).
  if nt = snd(dec(y,k))
  then out(c, enc(pair(nt,fst(dec(y,k))),k))
  else out(c, error)
";

/// The source text of a model, exactly as built.
pub fn model_source(id: ModelId) -> Result<String, CorpusError> {
    id.validate()?;
    let defs = match id.protocol {
        Protocol::Bac => BAC_DEFS,
        Protocol::Feldhofer => FELDHOFER_DEFS,
    };
    // Session bodies: keys, one reader thread and one prover thread per
    // session, tweaked per style.
    let (keys, v, p) = match (id.protocol, id.variant) {
        (Protocol::Bac, Variant::Silent) => ("ke,km", "V(c,d,ke,km)", "P(c,d,ke,km)"),
        (Protocol::Feldhofer, Variant::Silent) => ("k", "V(c,d,k)", "P(c,d,k)"),
        (Protocol::Feldhofer, Variant::Error) => ("k", "V(c,d,k)", "Perr(c,d,k)"),
        (Protocol::Bac, Variant::Error) => return Err(CorpusError::InvalidCombination),
    };
    let session = |v: &str, p: &str| match id.style {
        Style::Min => format!("( {v} | {p} )"),
        Style::Get => {
            let v = format!("out(c,getchallenge).{v}");
            let p = format!("in(d,x).[x = getchallenge] {p}");
            format!("( {v} | {p} )")
        }
        Style::Ch => {
            let v = v.replacen("(c,d,", "(ch1,ch1,", 1);
            let p = p.replacen("(c,d,", "(ch2,ch2,", 1);
            format!("( new ch1.out(r,ch1).{v} | new ch2.out(p,ch2).{p} )")
        }
        Style::Two => unreachable!(),
    };
    let body = match id.style {
        Style::Two => {
            // Bounded: two sessions with choice of key on the system side,
            // fixed keys on the specification side.
            let keyed = |t: &str, k: &str| match id.protocol {
                Protocol::Bac => t.replacen("(c,d,ke,km)", &format!("(c,d,ke{k},km{k})"), 1),
                Protocol::Feldhofer => t.replacen("(c,d,k)", &format!("(c,d,k{k})"), 1),
            };
            let keys2 = match id.protocol {
                Protocol::Bac => "ke1,km1,ke2,km2",
                Protocol::Feldhofer => "k1,k2",
            };
            match id.side {
                Side::System => format!(
                    "new {keys2}.(\n  ({} + {})\n| ({} + {})\n| ({} + {})\n| ({} + {}) )",
                    keyed(v, "1"),
                    keyed(v, "2"),
                    keyed(p, "1"),
                    keyed(p, "2"),
                    keyed(v, "1"),
                    keyed(v, "2"),
                    keyed(p, "1"),
                    keyed(p, "2"),
                ),
                Side::Spec => format!(
                    "new {keys2}.(\n  {}\n| {}\n| {}\n| {} )",
                    keyed(v, "1"),
                    keyed(p, "1"),
                    keyed(v, "2"),
                    keyed(p, "2"),
                ),
            }
        }
        _ => {
            let sess = session(v, p);
            match id.side {
                Side::System => format!("!new {keys}.!{sess}"),
                Side::Spec => format!("!new {keys}.{sess}"),
            }
        }
    };
    Ok(format!("{defs}\n{body}\n"))
}

/// Build a model: the extended process exactly as printed in the
/// corresponding theorem statement, with `let` desugared.
pub fn build_model(id: ModelId) -> Result<ExtendedProcess, CorpusError> {
    let src = model_source(id)?;
    Ok(parse_process(&src).expect("corpus model must parse"))
}

/// Free constants known to the attacker across the corpus: channel names
/// and protocol constants.
pub fn public_constants() -> Vec<Ident> {
    ["c", "d", "r", "p", "getchallenge", "error", "ok", "a", "b"]
        .iter()
        .map(|s| Ident::new(s))
        .collect()
}

/// Attack formulas transcribed from the unlinkability analyses.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum AttackId {
    PhiGet,
    PhiCh,
    Phi2,
    PsiMin,
    ChiFeldhofer,
    ChiPrimeFeldhofer,
    PsiErr,
    ChiErr,
    PhiNondist,
}

impl fmt::Display for AttackId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AttackId::PhiGet => "phi-get",
            AttackId::PhiCh => "phi-ch",
            AttackId::Phi2 => "phi-2",
            AttackId::PsiMin => "psi-min",
            AttackId::ChiFeldhofer => "chi-feldhofer",
            AttackId::ChiPrimeFeldhofer => "chi-prime-feldhofer",
            AttackId::PsiErr => "psi-err",
            AttackId::ChiErr => "chi-err",
            AttackId::PhiNondist => "phi-nondist",
        })
    }
}

impl AttackId {
    pub fn parse(s: &str) -> Result<AttackId, CorpusError> {
        Ok(match s {
            "phi-get" => AttackId::PhiGet,
            "phi-ch" => AttackId::PhiCh,
            "phi-2" => AttackId::Phi2,
            "psi-min" => AttackId::PsiMin,
            "chi-feldhofer" => AttackId::ChiFeldhofer,
            "chi-prime-feldhofer" => AttackId::ChiPrimeFeldhofer,
            "psi-err" => AttackId::PsiErr,
            "chi-err" => AttackId::ChiErr,
            "phi-nondist" => AttackId::PhiNondist,
            _ => return Err(CorpusError::UnknownAttack(s.to_string())),
        })
    }

    pub fn dialect(self) -> Dialect {
        match self {
            AttackId::PhiGet | AttackId::PhiCh | AttackId::Phi2 | AttackId::PsiMin
            | AttackId::PsiErr => Dialect::Fm,
            AttackId::ChiFeldhofer
            | AttackId::ChiPrimeFeldhofer
            | AttackId::ChiErr
            | AttackId::PhiNondist => Dialect::HpFm,
        }
    }
}

pub fn all_attack_ids() -> Vec<AttackId> {
    vec![
        AttackId::PhiGet,
        AttackId::PhiCh,
        AttackId::Phi2,
        AttackId::PsiMin,
        AttackId::ChiFeldhofer,
        AttackId::ChiPrimeFeldhofer,
        AttackId::PsiErr,
        AttackId::ChiErr,
        AttackId::PhiNondist,
    ]
}

/// The formula source, before instantiation of free variables.
pub fn attack_source(id: AttackId) -> &'static str {
    match id {
        AttackId::PhiGet => {
            "<d.getchallenge><out c (g1)><out c (g2)>(
  g1 = getchallenge & g2 = getchallenge &
  <out c (nt1)><d.nt1><d.nt1><out c (u1)><out c (u2)>(
    nt1 != getchallenge & u1 != getchallenge & u2 != getchallenge &
    <d.u1><out c (w)>w != getchallenge &
    <d.u2><out c (w)>w != getchallenge ) )"
        }
        AttackId::PhiCh => {
            "<out p (p1)><out r (r1)><out r (r2)>\
<out p1 (nt1)><r1.nt1><r2.nt1><out r1 (u1)><out r2 (u2)>(
  <p1.u1><out p1 (w)>true &
  <p1.u2><out p1 (w)>true )"
        }
        AttackId::Phi2 => {
            "<out c (nt1)><out c (nt2)><d.nt1><d.nt1><out c (u1)><out c (u2)>(
  <d.u1><out c (w)>true &
  <d.u2><out c (w)>true )"
        }
        AttackId::PsiMin => {
            "<out c (nt1)><d.nt1><d.nt1><out c (u1)><out c (u2)>(
  pair(fst(u1),snd(u1)) = u1 & pair(fst(u2),snd(u2)) = u2 &
  <d.u1><out c (w)>( pair(fst(w),snd(w)) = w &
    [d.z]<out c (v)>pair(fst(v),snd(v)) = v ) &
  <d.u2><out c (w)>( pair(fst(w),snd(w)) = w &
    [d.z]<out c (v)>pair(fst(v),snd(v)) = v ) )"
        }
        AttackId::ChiFeldhofer => {
            "<out c (nt1) @ 0.0.1.[]><d.nt1 @ 0.0.0.[]><d.nt1 @ 0.1.0.0.[]>\
<out c (u1) @ 0.0.0.[]><out c (u2) @ 0.1.0.0.[]>(
  <d.u1 @ 0.0.1.[]><out c (w) @ 0.0.1.[]>\
[d.z @ 1.0.0.0.[]]<out c (v) @ 1.0.0.0.[]>true &
  <d.u2 @ 0.0.1.[]><out c (w) @ 0.0.1.[]>\
[d.z @ 1.0.0.0.[]]<out c (v) @ 1.0.0.0.[]>true )"
        }
        AttackId::ChiPrimeFeldhofer => {
            "<out c (nt1) @ 0.0.1.[]><d.nt1 @ 0.0.0.[]><d.nt1 @ 0.1.0.0.[]>\
<out c (u1) @ 0.0.0.[]><out c (u2) @ 0.1.0.0.[]>(
  [d.u1 @ 1.0.0.0.[]]<out c (w) @ 1.0.0.0.[]>true &
  [d.u2 @ 1.0.0.0.[]]<out c (w) @ 1.0.0.0.[]>true )"
        }
        AttackId::PsiErr => {
            "<out c (nt1)><d.nt1><d.nt1><out c (u1)><out c (u2)>(
  u1 != error & u2 != error &
  <d.z><out c (e)>( e = error & [d.z][out c (v)]v != error ) &
  <d.u1><out c (w)>( w != error & [d.z][out c (v)]v != error ) &
  <d.u2><out c (w)>( w != error & [d.z][out c (v)]v != error ) )"
        }
        AttackId::ChiErr => {
            "<out c (nt1) @ 0.0.1.[]><d.nt1 @ 0.0.0.[]><d.nt1 @ 0.1.0.0.[]>\
<out c (u1) @ 0.0.0.[]><out c (u2) @ 0.1.0.0.[]>(
  u1 != error & u2 != error &
  <d.u1 @ 0.0.1.[]><out c (w) @ 0.0.1.[]>( w != error &
    [d.z @ 1.0.0.0.[]][out c (v) @ 1.0.0.0.[]]v != error ) &
  <d.u2 @ 0.0.1.[]><out c (w) @ 0.0.1.[]>( w != error &
    [d.z @ 1.0.0.0.[]][out c (v) @ 1.0.0.0.[]]v != error ) )"
        }
        AttackId::PhiNondist => {
            "<out c (nt1) @ 0.0.1.[]><d.nt1 @ 0.0.0.[]><d.nt1 @ 0.1.0.0.[]>\
<out c (u1) @ 0.0.0.[]><out c (u2) @ 0.1.0.0.[]>(
  <d.u1 @ 0.0.1.[]><out c (w) @ 0.0.1.[]>true &
  <d.u2 @ 0.0.1.[]><out c (w) @ 0.0.1.[]>true )"
        }
    }
}

/// The attack formula, with free variables instantiated to fresh public
/// constants.
pub fn attack_formula(id: AttackId) -> Formula {
    let phi = parse_formula(attack_source(id), id.dialect())
        .expect("corpus attack formula must parse");
    instantiate_free(&phi)
}

/// One row of the regression table: a system/spec pair, a formula, the
/// replication cap, and the expected verdicts.
#[derive(Clone, Debug)]
pub struct RegressRow {
    pub model_style: &'static str,
    pub attack: AttackId,
    pub bang_cap: u32,
    pub expect_system: bool,
    pub expect_spec: bool,
}

impl RegressRow {
    pub fn system_id(&self) -> ModelId {
        ModelId::parse(&format!("{}-system", self.model_style)).unwrap()
    }

    pub fn spec_id(&self) -> ModelId {
        ModelId::parse(&format!("{}-spec", self.model_style)).unwrap()
    }
}

/// The model-checking rows of the acceptance table.
pub fn regress_rows() -> Vec<RegressRow> {
    vec![
        RegressRow {
            model_style: "bac-get",
            attack: AttackId::PhiGet,
            bang_cap: 4,
            expect_system: true,
            expect_spec: false,
        },
        RegressRow {
            model_style: "bac-ch",
            attack: AttackId::PhiCh,
            bang_cap: 4,
            expect_system: true,
            expect_spec: false,
        },
        RegressRow {
            model_style: "bac-two",
            attack: AttackId::Phi2,
            bang_cap: 4,
            expect_system: true,
            expect_spec: false,
        },
        RegressRow {
            model_style: "bac-min",
            attack: AttackId::PsiMin,
            bang_cap: 5,
            expect_system: true,
            expect_spec: false,
        },
        RegressRow {
            model_style: "feldhofer-min",
            attack: AttackId::ChiFeldhofer,
            bang_cap: 5,
            expect_system: true,
            expect_spec: false,
        },
        RegressRow {
            model_style: "feldhofer-min",
            attack: AttackId::ChiPrimeFeldhofer,
            bang_cap: 5,
            expect_system: true,
            expect_spec: false,
        },
        RegressRow {
            model_style: "feldhofer-min-error",
            attack: AttackId::PsiErr,
            bang_cap: 5,
            expect_system: true,
            expect_spec: false,
        },
        RegressRow {
            model_style: "feldhofer-min-error",
            attack: AttackId::ChiErr,
            bang_cap: 5,
            expect_system: true,
            expect_spec: false,
        },
        RegressRow {
            model_style: "bac-min",
            attack: AttackId::PhiNondist,
            bang_cap: 5,
            expect_system: true,
            expect_spec: true,
        },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::procs::Process;

    #[test]
    fn all_models_build() {
        for id in all_model_ids() {
            let ep = build_model(id).unwrap();
            assert!(ep.frame.is_identity(), "{id}");
            assert!(ep.bound.is_empty(), "{id}");
        }
        assert_eq!(all_model_ids().len(), 24);
    }

    #[test]
    fn min_system_is_double_replication() {
        let ep = build_model(ModelId::parse("bac-min-system").unwrap()).unwrap();
        match &ep.body {
            Process::Bang(inner) => match inner.as_ref() {
                Process::New(ke, rest) => {
                    assert_eq!(ke.as_str(), "ke");
                    match rest.as_ref() {
                        Process::New(km, rest) => {
                            assert_eq!(km.as_str(), "km");
                            assert!(matches!(rest.as_ref(), Process::Bang(_)));
                        }
                        other => panic!("unexpected {other:?}"),
                    }
                }
                other => panic!("unexpected {other:?}"),
            },
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn min_spec_has_single_replication() {
        let ep = build_model(ModelId::parse("feldhofer-min-spec").unwrap()).unwrap();
        match &ep.body {
            Process::Bang(inner) => match inner.as_ref() {
                Process::New(_, rest) => assert!(matches!(rest.as_ref(), Process::Par(_, _))),
                other => panic!("unexpected {other:?}"),
            },
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn error_variant_only_for_feldhofer() {
        assert_eq!(
            ModelId::parse("bac-min-error-system").unwrap_err(),
            CorpusError::InvalidCombination
        );
        assert!(ModelId::parse("feldhofer-min-error-spec").is_ok());
    }

    #[test]
    fn attack_formulas_parse_and_classify() {
        for id in all_attack_ids() {
            let phi = attack_formula(id);
            assert!(phi.free_vars().is_empty(), "{id}");
            let expect_sim_fragment = matches!(
                id,
                AttackId::PhiGet | AttackId::PhiCh | AttackId::Phi2 | AttackId::PhiNondist
            );
            assert_eq!(
                phi.in_simulation_fragment(),
                expect_sim_fragment,
                "fragment classification for {id}"
            );
        }
    }

    #[test]
    fn model_roundtrip_through_printer() {
        for id in all_model_ids() {
            let ep = build_model(id).unwrap();
            let printed = ep.to_string();
            let back = parse_process(&printed).unwrap();
            assert_eq!(ep, back, "{id}");
        }
    }
}
