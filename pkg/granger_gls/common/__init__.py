"""共通ユーティリティパッケージ。"""
