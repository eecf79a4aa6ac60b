# granger_gls/common/counters.py
import logging
import threading
from collections import defaultdict

logger = logging.getLogger(__name__)


class TestCounter:
    """検定の実行回数と数値エラーの回数を手法ごとに追跡するクラス"""

    __test__ = False

    def __init__(self):
        self._lock = threading.Lock()
        self.reset()

    def reset(self):
        """カウントをすべて 0 に戻す"""
        with self._lock:
            # 全体のカウント
            self.tests_total = 0
            self.failures_total = 0
            # 手法ごとのカウント
            self.tests_by_method = defaultdict(int)
            self.failures_by_method = defaultdict(int)

    def increment_test(self, method: str):
        """検定の実行をカウント"""
        with self._lock:
            self.tests_total += 1
            self.tests_by_method[method] += 1

    def increment_failure(self, method: str):
        """数値エラーをカウント"""
        with self._lock:
            self.failures_total += 1
            self.failures_by_method[method] += 1

    def report(self):
        """実行回数のレポートをログに出力"""
        lines = ["=== 検定実行回数レポート ==="]
        lines.append(f"総検定回数: {self.tests_total}")
        lines.append(f"総数値エラー回数: {self.failures_total}")
        lines.append("手法ごとの検定回数:")
        for method, count in sorted(self.tests_by_method.items()):
            lines.append(f"  {method}: {count}")
        if self.failures_by_method:
            lines.append("手法ごとの数値エラー回数:")
            for method, count in sorted(self.failures_by_method.items()):
                lines.append(f"  {method}: {count}")
        lines.append("====================")
        logger.info("\n".join(lines))


# グローバルカウンターインスタンス
counter = TestCounter()
