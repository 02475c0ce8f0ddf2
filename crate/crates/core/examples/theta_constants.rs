//! Theta constants with characteristics in sixths: the Chowla–Selberg value
//! at τ = ω and a genus-3 example, each with its truncation bound.

use num_complex::Complex64;
use thomae::cx::{lift, omega_pow, powi};
use thomae::degeneration::chowla_selberg_value;
use thomae::linalg::Mat;
use thomae::theta::{theta_constant, Characteristic, ThetaSettings};
use thomae::Dd;

fn main() {
    let tau: Mat<Dd> = Mat::from_rows(vec![vec![omega_pow::<Dd>(1)]]);
    let chi = Characteristic::parse("1/6;-1/6").unwrap();
    let v = theta_constant(&tau, &chi, &ThetaSettings::for_precision::<Dd>()).unwrap();
    let six = powi(v.value, 6);
    println!("ϑ{chi}(ω)   = {} {}i", v.value.re, v.value.im);
    println!("its sixth power   = {} {}i", six.re, six.im);
    println!("closed form       = {}", chowla_selberg_value());
    println!("lattice points {}, tail bound {:.1e}", v.points, v.bound);

    let e = |re, im| lift::<f64>(Complex64::new(re, im));
    let tau3 = Mat::from_rows(vec![
        vec![e(0.2, 1.1), e(0.3, 0.1), e(-0.1, 0.2)],
        vec![e(0.3, 0.1), e(-0.4, 0.9), e(0.05, -0.15)],
        vec![e(-0.1, 0.2), e(0.05, -0.15), e(0.1, 1.3)],
    ]);
    for c in ["0,0,0;0,0,0", "1/6,5/6,1/2;1/3,1/6,2/3", "1/2,1/2,1/2;1/2,1/2,1/2"] {
        let chi = Characteristic::parse(c).unwrap();
        let v = theta_constant(&tau3, &chi, &ThetaSettings::for_precision::<f64>()).unwrap();
        println!("genus 3 ϑ{chi} = {:.15}", v.value);
    }
}
