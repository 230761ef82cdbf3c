//! Open-circuit potentials and entropic coefficients of LiCoO2 and LiC6
//! as closed-form functions of stoichiometry (table version 1).

/// LiCoO2 open-circuit potential at the reference temperature, V.
pub fn ocp_positive(theta: f64) -> f64 {
    let t2 = theta * theta;
    let t4 = t2 * t2;
    let t6 = t4 * t2;
    let t8 = t4 * t4;
    let t10 = t8 * t2;
    (-4.656 + 88.669 * t2 - 401.119 * t4 + 342.909 * t6 - 462.471 * t8 + 433.434 * t10)
        / (-1.0 + 18.933 * t2 - 79.532 * t4 + 37.311 * t6 - 73.083 * t8 + 95.96 * t10)
}

/// LiC6 open-circuit potential at the reference temperature, V.
pub fn ocp_negative(theta: f64) -> f64 {
    0.7222 + 0.1387 * theta + 0.029 * theta.sqrt() - 0.0172 / theta + 0.0019 / theta.powf(1.5)
        + 0.2808 * (0.9 - 15.0 * theta).exp()
        - 0.7984 * (0.4465 * theta - 0.4108).exp()
}

/// dU/dT of LiCoO2, V/K.
pub fn entropic_positive(theta: f64) -> f64 {
    let t = theta;
    -0.001 * (0.199521039 - 0.928373822 * t + 1.364550689000003 * t * t - 0.6115448939999998 * t.powi(3))
        / (1.0 - 5.661479886999997 * t + 11.47636191 * t * t - 9.82431213599998 * t.powi(3)
            + 3.048755063 * t.powi(4))
}

/// dU/dT of LiC6, V/K.
pub fn entropic_negative(theta: f64) -> f64 {
    let t = theta;
    let num = 0.005269056 + 3.299265709 * t - 91.79325798 * t.powi(2) + 1004.911008 * t.powi(3)
        - 5812.278127 * t.powi(4)
        + 19329.7549 * t.powi(5)
        - 37147.8947 * t.powi(6)
        + 38379.18127 * t.powi(7)
        - 16515.05308 * t.powi(8);
    let den = 1.0 - 48.09287227 * t + 1017.234804 * t.powi(2) - 10481.80419 * t.powi(3)
        + 59431.3 * t.powi(4)
        - 195881.6488 * t.powi(5)
        + 374577.3152 * t.powi(6)
        - 385821.1607 * t.powi(7)
        + 165705.8597 * t.powi(8);
    0.001 * num / den
}
