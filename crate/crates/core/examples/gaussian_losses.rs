//! Gaussian box losses with analytic gradients.

use rotkit::gaussian::{
    box_to_gaussian, definition_twin, gwd_distance, gwd_loss, gwd_loss_with_grad, kld_divergence, kld_loss_with_grad,
    LossConfig,
};
use rotkit::RBox;

fn main() -> rotkit::Result<()> {
    let cfg = LossConfig::default();
    let gt = RBox::le(50.0, 50.0, 40.0, 10.0, 30.0)?;
    let pred = RBox::le(52.0, 49.0, 36.0, 12.0, 25.0)?;

    let (gp, gg) = (box_to_gaussian(&pred)?, box_to_gaussian(&gt)?);
    println!("wasserstein^2 {:.6}, kl {:.6}", gwd_distance(&gp, &gg), kld_divergence(&gp, &gg));

    let gwd = gwd_loss_with_grad(&pred, &gt, &cfg)?;
    let kld = kld_loss_with_grad(&pred, &gt, &cfg)?;
    println!("gwd loss {:.6} grad [cx cy w h theta] {:?}", gwd.value, gwd.grad);
    println!("kld loss {:.6} grad [cx cy w h theta] {:?}", kld.value, kld.grad);

    // the same rectangle written with swapped sides and a 90 degree turn
    let twin = definition_twin(&pred);
    println!("twin {twin:?}: gwd loss {:.6}", gwd_loss(&twin, &gt, &cfg)?);
    Ok(())
}
