//! Products, commutation and Pauli images of Majorana monomials.

use syklab::algebra::{anticommutes, multiply, MajoranaMonomial};
use syklab::selfcheck::algebra_self_check;

fn main() -> syklab::Result<()> {
    let a = MajoranaMonomial::hermitian(8, &[1, 2, 3, 4])?;
    let b = MajoranaMonomial::hermitian(8, &[3, 4, 5, 6])?;
    let c = MajoranaMonomial::hermitian(8, &[4, 5, 6, 7])?;
    println!("a = {a:?}, pauli {:?}", a.pauli());
    println!("a·b = {:?}", multiply(&a, &b)?);
    println!("a, b anticommute: {}", anticommutes(&a, &b)?);
    println!("a, c anticommute: {}", anticommutes(&a, &c)?);
    println!("a·a = {:?}", multiply(&a, &a)?);

    for row in algebra_self_check(4, 200, 0)? {
        println!("{:<28} {:>4} cases, {} failures", row.name, row.cases, row.failures);
    }
    Ok(())
}
