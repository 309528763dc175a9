# oodp_desk/data/__init__.py
# Geçiş toplama ve veri seti formatı
