use std::time::Instant;

use gowers_core::constructions::{ConstructionSpec, DEFAULT_BOX_FRACTION};
use gowers_core::inverse::{check_vanishing_derivatives, inverse_u2, reconstruct_polynomial, FpPoly};
use gowers_core::nilseq::{
    bracket_nilsequence, bracket_phase, heisenberg_lower_central, is_polynomial_map, smoothed_bracket_nilsequence,
    weyl_diagnostic, Heisenberg, PolyCheckConfig, SmoothCutoff,
};
use gowers_core::progressions::{lambda3_via_fourier, lambda_k, lambda_k_forced};
use gowers_core::roth::{run_increment_loop, ExitReason, IncrementConfig};
use gowers_core::uniformity::{gowers_norm, gowers_norm_interval, Method};
use gowers_core::{CyclicFunction, Indicator};
use serde::Deserialize;
use serde_json::json;

use crate::output::{emit, read_json, to_value, Failure, Params};
use crate::{suite, Cli, Command, KindArg, MethodArg, NilseqAction};

/// A set `{"modulus", "subset"}` or a function `{"modulus", "re", "im"}`.
#[derive(Deserialize)]
#[serde(untagged)]
enum FunctionInput {
    Set(Indicator),
    Function(CyclicFunction),
}

impl FunctionInput {
    fn function(&self) -> CyclicFunction {
        match self {
            FunctionInput::Set(a) => a.to_function(),
            FunctionInput::Function(f) => f.clone(),
        }
    }

    fn density(&self) -> Option<f64> {
        match self {
            FunctionInput::Set(a) => Some(a.density()),
            FunctionInput::Function(_) => None,
        }
    }
}

/// `{"n": N, "set": [...]}`, a Behrend record, or `construct behrend` output.
#[derive(Deserialize)]
#[serde(untagged)]
enum SetInput {
    Plain {
        #[serde(alias = "N")]
        n: u64,
        #[serde(alias = "elements")]
        set: Vec<u64>,
    },
    Wrapped {
        #[serde(alias = "construction")]
        output: Box<SetInput>,
    },
}

impl SetInput {
    fn into_parts(self) -> (u64, Vec<u64>) {
        match self {
            SetInput::Plain { n, set } => (n, set),
            SetInput::Wrapped { output } => output.into_parts(),
        }
    }
}

pub fn run(cli: &Cli) -> Result<(), Failure> {
    let g = &cli.global;
    let out = g.out.as_deref();
    match &cli.command {
        Command::CountAps { k, input, fourier, force } => {
            let inp: FunctionInput = read_json(input)?;
            let f = inp.function();
            let (lambda, method) = if *fourier {
                if *k != 3 {
                    return Err(Failure::Usage("--fourier is only available for k = 3".into()));
                }
                (lambda3_via_fourier(&f, &f, &f)?, "fourier")
            } else {
                let fs = vec![f.clone(); *k];
                (if *force { lambda_k_forced(&fs)? } else { lambda_k(&fs)? }, "direct")
            };
            let v = json!({
                "lambda": lambda.re,
                "lambda_im": lambda.im,
                "alpha": inp.density(),
                "M": f.modulus(),
                "k": k,
                "method": method,
            });
            emit(&v, out, g.json)
        }
        Command::GowersNorm { s, input, method, interval, no_timing } => {
            let f = read_json::<FunctionInput>(input)?.function();
            let start = Instant::now();
            let mut v = match interval {
                Some(n) => json!({ "s": s, "value": gowers_norm_interval(&f, *n, *s)?, "method": "interval", "N": n }),
                None => {
                    let m = match method {
                        MethodArg::Naive => Method::Naive,
                        MethodArg::Recursive => Method::Recursive,
                    };
                    to_value(&gowers_norm(&f, *s, m)?)
                }
            };
            if !no_timing {
                v["seconds"] = json!(start.elapsed().as_secs_f64());
            }
            emit(&v, out, g.json)
        }
        Command::InverseU2 { delta, input } => {
            let f = read_json::<FunctionInput>(input)?.function();
            let found = inverse_u2(&f, *delta)?;
            emit(&to_value(&found), out, g.json)?;
            if found.guaranteed && found.correlation < delta * delta - 1e-9 {
                return Err(Failure::Check(format!(
                    "correlation {} below delta^2 = {}",
                    found.correlation,
                    delta * delta
                )));
            }
            Ok(())
        }
        Command::ToyInverse { p, s, poly } => {
            let poly = FpPoly::new(*p, poly)?;
            let table = poly.table();
            let vanishing = check_vanishing_derivatives(&table, s + 1)?;
            if !vanishing.vanishes {
                emit(&json!({ "vanishing": vanishing }), out, g.json)?;
                return Err(Failure::Check(format!("({}+1)-fold derivatives do not vanish", s)));
            }
            let rec = reconstruct_polynomial(&table, *s).map_err(|e| Failure::Check(e.to_string()))?;
            let matches = rec.poly == poly;
            emit(&json!({ "vanishing": vanishing, "reconstruction": rec, "matches": matches }), out, g.json)?;
            if matches {
                Ok(())
            } else {
                Err(Failure::Check("reconstructed coefficients differ from the input".into()))
            }
        }
        Command::Construct { kind, params } => {
            let p = Params::parse(params)?;
            let spec = match kind {
                KindArg::Behrend => ConstructionSpec::Behrend { n: p.require(&["N", "n"])? },
                KindArg::Quadphase => ConstructionSpec::QuadPhase { m: p.require(&["M", "m"])? },
                KindArg::Bohr => ConstructionSpec::QuadBohr { m: p.require(&["M", "m"])?, w: p.require(&["w"])? },
                KindArg::Blockrandom => ConstructionSpec::BlockRandom {
                    n: p.require(&["N", "n"])?,
                    seed: p.get(&["seed"])?.unwrap_or(g.seed),
                },
                KindArg::Almostnil => ConstructionSpec::AlmostNil {
                    m: p.require(&["M", "m"])?,
                    box_fraction: p.get(&["box", "box_fraction"])?.unwrap_or(DEFAULT_BOX_FRACTION),
                },
            };
            let built = spec.build()?;
            emit(&json!({ "spec": spec, "construction": built }), out, g.json)
        }
        Command::Nilseq { action, params } => nilseq(*action, &Params::parse(params)?, cli),
        Command::RothIncrement { input, config, trace } => {
            let (n, set) = read_json::<SetInput>(input)?.into_parts();
            let cfg: IncrementConfig = match config {
                Some(path) => read_json(path)?,
                None => IncrementConfig::default(),
            };
            let t = run_increment_loop(&set, n, &cfg)?;
            emit(&to_value(&t), trace.as_deref().or(out), g.json)?;
            if t.final_exit == ExitReason::NoIncrement {
                return Err(Failure::Check("no density increment found; certificate recorded in the trace".into()));
            }
            Ok(())
        }
        Command::Suite { preset, modulus } => suite::run(preset, *modulus, g),
    }
}

fn nilseq(action: NilseqAction, p: &Params, cli: &Cli) -> Result<(), Failure> {
    let g = &cli.global;
    let out = g.out.as_deref();
    let l: i64 = p.get(&["L", "l"])?.unwrap_or(10);
    let from: i64 = p.get(&["from"])?.unwrap_or(0);
    let to: i64 = p.get(&["to"])?.unwrap_or(20);
    if from > to {
        return Err(Failure::Usage(format!("empty range {from}..={to}")));
    }
    match action {
        NilseqAction::Eval => {
            let values: Vec<_> = match p.get::<f64>(&["margin"])? {
                Some(margin) => {
                    let ns = smoothed_bracket_nilsequence(l, SmoothCutoff::new(margin)?)?;
                    (from..=to).map(|n| (n, ns.eval(n))).collect()
                }
                None => {
                    let ns = bracket_nilsequence(l)?;
                    (from..=to).map(|n| (n, ns.eval(n))).collect()
                }
            };
            let rows: Vec<_> = values.iter().map(|(n, z)| json!({ "n": n, "re": z.re, "im": z.im })).collect();
            emit(&json!({ "L": l, "values": rows }), out, g.json)
        }
        NilseqAction::Bracket => {
            let ns = bracket_nilsequence(l)?;
            let mut worst = 0.0f64;
            for n in from..=to {
                worst = worst.max((bracket_phase(l, n)? - ns.eval(n)).norm());
            }
            let agree = worst <= 1e-9;
            emit(&json!({ "L": l, "from": from, "to": to, "max_error": worst, "agree": agree }), out, g.json)?;
            if agree {
                Ok(())
            } else {
                Err(Failure::Check(format!("bracket paths differ by {worst:e}")))
            }
        }
        NilseqAction::CheckPoly => {
            let s: usize = p.get(&["s"])?.unwrap_or(2);
            let cfg = PolyCheckConfig {
                window: p.get(&["window"])?.unwrap_or(PolyCheckConfig::default().window),
                max_shift: p.get(&["shift"])?.unwrap_or(PolyCheckConfig::default().max_shift),
                budget: p.get(&["budget"])?.unwrap_or(PolyCheckConfig::default().budget),
            };
            let filt = heisenberg_lower_central::<f64>(p.get(&["tol"])?.unwrap_or(1e-9));
            let form = p.raw("form").unwrap_or("quadratic");
            let check = match form {
                "quadratic" => {
                    let a: f64 = p.get(&["a"])?.unwrap_or(0.5);
                    let b: f64 = p.get(&["b"])?.unwrap_or(0.25);
                    let c: f64 = p.get(&["c"])?.unwrap_or(0.125);
                    is_polynomial_map(&|n| Heisenberg::new(a * n as f64, b * n as f64, c * (n * n) as f64), &filt, s, cfg)
                }
                "cubic" => {
                    let c: f64 = p.get(&["c"])?.unwrap_or(0.125);
                    is_polynomial_map(&|n| Heisenberg::new(0.0, 0.0, c * (n * n * n) as f64), &filt, s, cfg)
                }
                "exp" => is_polynomial_map(&|n| Heisenberg::new(0.0, 0.0, (n as f64 / 4.0).exp()), &filt, s, cfg),
                other => return Err(Failure::Usage(format!("unknown form `{other}` (quadratic, cubic, exp)"))),
            };
            emit(&json!({ "form": form, "s": s, "check": check }), out, g.json)
        }
        NilseqAction::Weyl => {
            let coeffs: Vec<f64> = p
                .raw("coeffs")
                .ok_or_else(|| Failure::Usage("missing parameter coeffs (e.g. coeffs=0:0:1.4142)".into()))?
                .split(':')
                .map(|c| c.trim().parse().map_err(|_| Failure::Usage(format!("bad coefficient `{c}`"))))
                .collect::<Result<_, _>>()?;
            let n: u64 = p.require(&["N", "n"])?;
            let delta: f64 = p.get(&["delta"])?.unwrap_or(0.1);
            let w = weyl_diagnostic(&coeffs, n, delta, p.get(&["qmax"])?)?;
            emit(&to_value(&w), out, g.json)
        }
    }
}
