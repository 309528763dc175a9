# oodp_desk/ml/__init__.py
# OODP ağı, kayıplar, eğitim ve değerlendirme
