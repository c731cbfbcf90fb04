"""
데이터 어댑터 패키지
"""
