"""
lung-attr-seg: text-attribute guided lung infection segmentation
================================================================

Segments infected regions in chest X-rays without pixel labels.  The
only segmentation supervision is a coarse mask obtained by thresholding
an unsupervised saliency map; the clinical sentence that accompanies
each image is parsed into four categorical attributes (which side, how
many areas, where in the left lung, where in the right lung) that guide
the network.

Currently implements:
  - Rule-based attribute extraction from clinical descriptions
  - Synthetic image-text-mask generator and QaTa-style ingestion
  - UNet with attribute-image cross-attention fusion
  - Mask-guided attribute classification heads
  - Coarse-mask, attribute and self-training objectives
  - Transductive / inductive evaluation, ablation sweeps, reports
"""

__version__ = "0.1.0"
__codename__ = "lobes"
