"""GLS Granger - 自己共分散行列推定と一般化最小二乗法によるGranger因果性検定。"""

__version__ = "0.1.0"
