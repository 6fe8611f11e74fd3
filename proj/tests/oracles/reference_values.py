import math
M=(1<<64)-1
class MT64:
    def __init__(s,seed):
        s.mt=[0]*312; s.mt[0]=seed&M
        for i in range(1,312):
            s.mt[i]=(6364136223846793005*(s.mt[i-1]^(s.mt[i-1]>>62))+i)&M
        s.i=312
    def gen(s):
        if s.i>=312:
            for k in range(312):
                x=(s.mt[k]&0xFFFFFFFF80000000)|(s.mt[(k+1)%312]&0x7FFFFFFF)
                xa=x>>1
                if x&1: xa^=0xB5026F5AA96619E9
                s.mt[k]=s.mt[(k+156)%312]^xa
            s.i=0
        y=s.mt[s.i]; s.i+=1
        y^=(y>>29)&0x5555555555555555
        y^=(y<<17)&0x71D67FFFEDA60000
        y^=(y<<37)&0xFFF7EEE000000000
        y^=y>>43
        return y&M
r=MT64(5489)
for _ in range(9999): r.gen()
print("10000th default", r.gen())
r=MT64(0)
b=1/math.sqrt(4)
w=[]
for _ in range(8):
    u=(r.gen()>>11)*2.0**-53
    w.append(-b+(b-(-b))*u)
print("init(0,4,2)", [repr(x) for x in w])
def mix64(x):
    x=(x+0x9e3779b97f4a7c15)&M
    x=((x^(x>>30))*0xbf58476d1ce4e5b9)&M
    x=((x^(x>>27))*0x94d049bb133111eb)&M
    return x^(x>>31)
def fnv(s):
    h=0xcbf29ce484222325
    for c in s.encode(): h^=c; h=(h*0x100000001b3)&M
    return h
print("derive(0,'mining')", mix64(0^fnv("mining")))
print("derive(42,'mining')", mix64(42^fnv("mining")))
print("derive(7, 3)", mix64((7+mix64(4))&M))
# haversine via spherical law of cosines / chord, independent
R=6371000.0
def chord(a,b):
    la1,lo1,la2,lo2=map(math.radians,(*a,*b))
    v1=(math.cos(la1)*math.cos(lo1),math.cos(la1)*math.sin(lo1),math.sin(la1))
    v2=(math.cos(la2)*math.cos(lo2),math.cos(la2)*math.sin(lo2),math.sin(la2))
    c=math.dist(v1,v2); return 2*R*math.asin(c/2)
print("h1", repr(chord((52.3702,4.8952),(52.3703,4.8952))), repr(1e-4*math.pi/180*R))
print("h2", repr(chord((0,0),(0,180))), repr(math.pi*R))
