"""推定・検定パッケージ。"""
