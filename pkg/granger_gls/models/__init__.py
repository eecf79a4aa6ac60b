"""出力レコードのスキーマ。"""
