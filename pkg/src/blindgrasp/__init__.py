"""Audio-visual imitation learning for occluded 2D manipulation.

Subpackages:
  simenv   -- deterministic vertical-plane simulator with synthesized sound
  dsp      -- rolling audio buffers and spectrograms
  nn       -- dense-tensor reverse-mode autodiff and Adam
  policy   -- multimodal recurrent policy with ablation switches
  learn    -- behavior cloning and intervention-gated finetuning
  harness  -- CLI, configs, experiment orchestration, serve mode
"""

__version__ = "0.1.0"
