//! Acceptance runner: one PASS/FAIL line per criterion.
//!
//! Tolerances and runtime limits are pinned here, independently of the
//! bounds each check carries, and every named quantity must be present.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use slab_tbc::verify::{run_check, CheckResult};

const SEED: u64 = 1;

enum Req {
    AtMost(&'static str, f64),
    AtLeast(&'static str, f64),
    Within(&'static str, f64, f64),
    Finite(&'static str),
}

impl Req {
    fn eval(&self, r: &CheckResult) -> Result<(), String> {
        let name = match self {
            Req::AtMost(n, _) | Req::AtLeast(n, _) | Req::Within(n, _, _) | Req::Finite(n) => *n,
        };
        let v = r.get(name).ok_or_else(|| format!("{}: `{name}` missing", r.check_id))?;
        let ok = v.is_finite()
            && match *self {
                Req::AtMost(_, lim) => v <= lim,
                Req::AtLeast(_, lim) => v >= lim,
                Req::Within(_, lo, hi) => (lo..=hi).contains(&v),
                Req::Finite(_) => true,
            };
        if ok {
            Ok(())
        } else {
            Err(format!("{}: `{name}` = {v:e}", r.check_id))
        }
    }
}

struct Criterion {
    id: u32,
    title: &'static str,
    limit: Duration,
    checks: &'static [(&'static str, &'static [Req])],
}

const SQRT2_SLACK: f64 = std::f64::consts::SQRT_2 * 1.05;

const CRITERIA: &[Criterion] = &[
    Criterion {
        id: 1,
        title: "branch and form identities",
        limit: Duration::from_secs(5),
        checks: &[(
            "branch-and-forms",
            &[
                Req::AtLeast("min Re(beta)/|beta|", f64::MIN_POSITIVE),
                Req::AtMost("max beta^2 residual", 1e-13),
                Req::AtMost("max form defect (top)", 1e-12),
                Req::AtMost("max form defect (bottom)", 1e-12),
            ],
        )],
    },
    Criterion {
        id: 2,
        title: "capacity positivity",
        limit: Duration::from_secs(10),
        checks: &[(
            "capacity-positivity",
            &[
                Req::AtLeast("min Re<Bu,u> / |u|^2", -1e-12),
                Req::AtLeast("min Hermitian-part eigenvalue / |B|", -1e-12),
            ],
        )],
    },
    Criterion {
        id: 3,
        title: "capacity continuity",
        limit: Duration::from_secs(10),
        checks: &[(
            "capacity-continuity",
            &[
                Req::AtMost("max |Bu|_div / (C C_j |u|_curl)", 1.0 + 1e-9),
                Req::AtMost("max |<Bu,w>| / (C_j |u| |w|)", 1.0 + 1e-9),
                Req::AtMost("max decay ratio / F-bound", 1.0 + 1e-12),
            ],
        )],
    },
    Criterion {
        id: 4,
        title: "discrete trace inequality",
        limit: Duration::from_secs(30),
        checks: &[(
            "trace-inequality",
            &[Req::AtMost("max ratio", SQRT2_SLACK), Req::AtMost("ratio, constant field", SQRT2_SLACK)],
        )],
    },
    Criterion {
        id: 5,
        title: "Laplace/Parseval and integrator weights",
        limit: Duration::from_secs(5),
        checks: &[(
            "laplace-parseval",
            &[
                Req::AtMost("parseval residual", 1e-6),
                Req::AtMost("deviation from analytic value", 1e-6),
                Req::AtMost("antiderivative transform defect", 1e-6),
                Req::AtMost("max |W_n - dt| / dt (backward Euler, 1/s)", 1e-12),
            ],
        )],
    },
    Criterion {
        id: 6,
        title: "conductor-walled energy conservation",
        limit: Duration::from_secs(120),
        checks: &[(
            "pec-energy",
            &[
                Req::AtMost("scheme energy drift", 1e-12),
                Req::AtMost("e1 drift", 1e-3),
                Req::Within("drift ratio under refinement", 3.2, 4.8),
            ],
        )],
    },
    Criterion {
        id: 7,
        title: "transparent boundary fidelity",
        limit: Duration::from_secs(300),
        checks: &[
            (
                "tbc-fidelity",
                &[
                    Req::AtMost("relative L2 mismatch", 1e-3),
                    Req::AtMost("residual after transit / incident", 1e-3),
                    Req::Within("observed order", 1.8, 2.1),
                ],
            ),
            (
                "oracle-agreement",
                &[
                    Req::Within("observed order, levels 0-1", 1.8, 2.1),
                    Req::Within("observed order, levels 1-2", 1.8, 2.1),
                ],
            ),
        ],
    },
    Criterion {
        id: 8,
        title: "boundary passivity",
        limit: Duration::from_secs(60),
        checks: &[(
            "boundary-passivity",
            &[
                Req::AtLeast("min random-history work / |u|^2", -1e-10),
                Req::AtLeast("min cumulative pulse work / max e1", -1e-8),
            ],
        )],
    },
    Criterion {
        id: 9,
        title: "splitting consistency",
        limit: Duration::from_secs(60),
        checks: &[("splitting", &[Req::AtMost("max |full - (conductor + current)| / max |full|", 1e-10)])],
    },
    Criterion {
        id: 10,
        title: "a priori estimates over a horizon sweep",
        limit: Duration::from_secs(300),
        checks: &[(
            "apriori",
            &[
                Req::Finite("kappa (sup norm), 4 T0"),
                Req::Finite("kappa (L2 in time), 4 T0"),
                Req::AtMost("sweep spread (sup norm)", 1.2),
                Req::AtMost("sweep spread (L2 in time)", 1.2),
                Req::AtMost("refinement spread (sup norm)", 1.2),
                Req::AtMost("refinement spread (L2 in time)", 1.2),
            ],
        )],
    },
    Criterion {
        id: 11,
        title: "s-domain closed form and resolvent bounds",
        limit: Duration::from_secs(60),
        checks: &[
            (
                "sdomain-oracle",
                &[
                    Req::AtMost("max error at nz = 512", 1e-8),
                    Req::Within("min observed order", 1.9, 2.1),
                    Req::Within("max observed order", 1.9, 2.1),
                ],
            ),
            (
                "auxiliary-bound",
                &[Req::Finite("max measured constant"), Req::AtMost("refinement spread", 1.2)],
            ),
            (
                "reduced-sdomain-bound",
                &[Req::Finite("max measured constant"), Req::AtMost("refinement spread", 1.2)],
            ),
        ],
    },
];

fn evaluate(c: &Criterion) -> (Vec<String>, Duration) {
    let start = Instant::now();
    let mut problems = Vec::new();
    for (id, reqs) in c.checks {
        match run_check(id, SEED) {
            Ok(r) => {
                if !r.passed() {
                    problems.push(format!("{id}: check reported {:?}", r.status));
                }
                problems.extend(reqs.iter().filter_map(|q| q.eval(&r).err()));
            }
            Err(e) => problems.push(format!("{id}: {e}")),
        }
    }
    let elapsed = start.elapsed();
    if elapsed > c.limit {
        problems.push(format!("runtime {:.1} s over {} s", elapsed.as_secs_f64(), c.limit.as_secs()));
    }
    (problems, elapsed)
}

fn main() -> ExitCode {
    let filter: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for c in CRITERIA.iter().filter(|c| filter.is_empty() || filter.contains(&c.id)) {
        let (problems, elapsed) = evaluate(c);
        let tag = if problems.is_empty() { "PASS" } else { "FAIL" };
        println!("{tag} {:>2} {:<44} {:>7.2} s", c.id, c.title, elapsed.as_secs_f64());
        for p in &problems {
            println!("        {p}");
        }
        failed += usize::from(!problems.is_empty());
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
